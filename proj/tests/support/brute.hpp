#pragma once

// Independent test oracles.  Everything here is deliberately naive: fixpoint
// rewriting, bounded breadth-first searches, exhaustive scans.  These must not
// share code paths with the implementations they check.

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <vector>

#include "cosetc/words.hpp"

namespace brute {

using cosetc::DefiningGraph;
using cosetc::Letter;
using cosetc::Word;

// Fixpoint of single-pair cancellation, deleting the leftmost cancelling pair
// each round.
inline Word naive_free_reduce(Word w) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            if (w.letters[i] == -w.letters[i + 1]) {
                w.letters.erase(w.letters.begin() + i, w.letters.begin() + i + 2);
                changed = true;
                break;
            }
        }
    }
    return w;
}

// All words reachable from w by one legal swap or one cancellation.
inline std::vector<Word> rewrite_neighbors(const DefiningGraph& g, const Word& w) {
    std::vector<Word> out;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        if (w.letters[i] == -w.letters[i + 1]) {
            Word v = w;
            v.letters.erase(v.letters.begin() + i, v.letters.begin() + i + 2);
            out.push_back(std::move(v));
        }
        if (g.adjacent(cosetc::gen_of(w.letters[i]), cosetc::gen_of(w.letters[i + 1]))) {
            Word v = w;
            std::swap(v.letters[i], v.letters[i + 1]);
            out.push_back(std::move(v));
        }
    }
    return out;
}

// Breadth-first search over the rewriting graph; returns every word reachable
// from w (commutations and cancellations), capped by exploration depth.
inline std::set<std::vector<Letter>> rewrite_closure(const DefiningGraph& g, const Word& w,
                                                     std::size_t cap = 200000) {
    std::set<std::vector<Letter>> seen{w.letters};
    std::queue<Word> q;
    q.push(w);
    while (!q.empty() && seen.size() < cap) {
        Word cur = q.front();
        q.pop();
        for (Word& n : rewrite_neighbors(g, cur)) {
            if (seen.insert(n.letters).second) q.push(n);
        }
    }
    return seen;
}

// Shortlex-least word equivalent to w, by exhaustive rewriting.
inline Word naive_raag_nf(const DefiningGraph& g, const Word& w) {
    auto closure = rewrite_closure(g, w);
    Word best = w;
    for (const auto& ls : closure) {
        Word cand{ls};
        if (cosetc::shortlex_less(cand, best)) best = cand;
    }
    // Rewriting is terminating only through cancellations; iterate until the
    // minimum stabilizes.
    if (best.size() < w.size()) return naive_raag_nf(g, best);
    return best;
}

inline Word random_word(std::mt19937_64& rng, int alphabet, int length) {
    Word w;
    std::uniform_int_distribution<int> gen(0, alphabet - 1);
    std::uniform_int_distribution<int> sgn(0, 1);
    for (int i = 0; i < length; ++i)
        w.letters.push_back(cosetc::make_letter(gen(rng), sgn(rng) ? +1 : -1));
    return w;
}

// Group elements of the subgroup generated by `gens`, up to product length
// `depth`, as canonical forms.
inline std::set<std::vector<Letter>> subgroup_elements(const DefiningGraph& g,
                                                       const std::vector<Word>& gens, int depth) {
    std::set<std::vector<Letter>> seen;
    std::queue<std::pair<Word, int>> q;
    q.push({Word{}, 0});
    seen.insert({});
    while (!q.empty()) {
        auto [cur, d] = q.front();
        q.pop();
        if (d == depth) continue;
        for (const Word& gen : gens) {
            for (const Word& factor : {gen, gen.inverse_word()}) {
                Word next = cosetc::nf_raag(g, cur.concat(factor)).word;
                if (seen.insert(next.letters).second) q.push({next, d + 1});
            }
        }
    }
    return seen;
}

}  // namespace brute
