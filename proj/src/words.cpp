#include "cosetc/words.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

namespace cosetc {

bool shortlex_less(const Word& a, const Word& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
        int ra = letter_rank(a.letters[i]);
        int rb = letter_rank(b.letters[i]);
        if (ra != rb) return ra < rb;
    }
    return false;
}

DefiningGraph::DefiningGraph(int n_vertices) : n_(n_vertices), adj_(n_vertices, 0) {
    if (n_vertices < 0 || n_vertices > 64)
        throw MalformedError("alphabet size must be between 0 and 64");
}

DefiningGraph DefiningGraph::cycle(int n) {
    DefiningGraph g(n);
    for (int i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n);
    return g;
}

void DefiningGraph::add_edge(int a, int b) {
    if (a < 0 || b < 0 || a >= n_ || b >= n_) throw MalformedError("edge endpoint out of range");
    if (a == b) throw MalformedError("defining graph must be irreflexive");
    adj_[a] |= std::uint64_t{1} << b;
    adj_[b] |= std::uint64_t{1} << a;
}

bool DefiningGraph::adjacent(int a, int b) const {
    return a != b && (adj_[a] >> b) & 1;
}

std::vector<int> DefiningGraph::link(int v) const {
    std::vector<int> out;
    for (int w = 0; w < n_; ++w)
        if (adjacent(v, w)) out.push_back(w);
    return out;
}

std::vector<int> DefiningGraph::star(int v) const {
    std::vector<int> out;
    for (int w = 0; w < n_; ++w)
        if (w == v || adjacent(v, w)) out.push_back(w);
    return out;
}

bool DefiningGraph::triangle_free() const {
    for (int a = 0; a < n_; ++a)
        for (int b = a + 1; b < n_; ++b)
            if (adjacent(a, b) && (adj_[a] & adj_[b]) != 0) return false;
    return true;
}

int DefiningGraph::min_valence() const {
    int best = n_;
    for (int v = 0; v < n_; ++v) {
        int deg = 0;
        for (int w = 0; w < n_; ++w)
            if (adjacent(v, w)) ++deg;
        best = std::min(best, deg);
    }
    return n_ == 0 ? 0 : best;
}

bool DefiningGraph::connected() const {
    if (n_ <= 1) return true;
    std::vector<char> seen(n_, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w = 0; w < n_; ++w)
            if (adjacent(v, w) && !seen[w]) {
                seen[w] = 1;
                ++count;
                stack.push_back(w);
            }
    }
    return count == n_;
}

bool DefiningGraph::edgeless() const {
    for (int v = 0; v < n_; ++v)
        if (adj_[v] != 0) return false;
    return true;
}

void check_word(const DefiningGraph& graph, const Word& w) {
    for (Letter l : w.letters) {
        if (l == 0 || gen_of(l) >= graph.size())
            throw MalformedError("letter " + std::to_string(l) + " outside alphabet of size " +
                                 std::to_string(graph.size()));
    }
}

NormalForm free_reduce(const Word& w) {
    std::vector<Letter> stack;
    stack.reserve(w.size());
    for (Letter l : w.letters) {
        if (l == 0) throw MalformedError("zero letter");
        if (!stack.empty() && stack.back() == -l)
            stack.pop_back();
        else
            stack.push_back(l);
    }
    return NormalForm{Word{std::move(stack)}};
}

namespace {

// Piling of a word: one stack of symbols per generator.  A letter of
// generator v pushes its sign onto column v and a 0 marker onto the column of
// every generator that does not commute with v; a letter whose whole piece
// sits on top of its inverse pops instead.  The piling is invariant under the
// RAAG relations, so it identifies group elements.
struct Piling {
    const DefiningGraph& graph;
    std::vector<std::vector<std::int8_t>> col;

    explicit Piling(const DefiningGraph& g) : graph(g), col(g.size()) {}

    void push(Letter l) {
        int v = gen_of(l);
        std::int8_t s = static_cast<std::int8_t>(sign_of(l));
        bool cancels = !col[v].empty() && col[v].back() == -s;
        if (cancels) {
            for (int w = 0; w < graph.size(); ++w) {
                if (w == v || graph.adjacent(v, w)) continue;
                if (col[w].empty() || col[w].back() != 0) {
                    cancels = false;
                    break;
                }
            }
        }
        if (cancels) {
            col[v].pop_back();
            for (int w = 0; w < graph.size(); ++w)
                if (w != v && !graph.adjacent(v, w)) col[w].pop_back();
        } else {
            col[v].push_back(s);
            for (int w = 0; w < graph.size(); ++w)
                if (w != v && !graph.adjacent(v, w)) col[w].push_back(0);
        }
    }

    // Shortlex-least linearization: repeatedly emit the least letter whose
    // piece lies at the bottom of all of its columns.
    Word extract() const {
        int n = graph.size();
        std::vector<std::size_t> pos(n, 0);
        std::size_t remaining = 0;
        for (int v = 0; v < n; ++v) remaining += col[v].size();
        Word out;
        while (remaining > 0) {
            int best = -1;
            for (int v = 0; v < n; ++v) {
                if (pos[v] >= col[v].size() || col[v][pos[v]] == 0) continue;
                bool ready = true;
                for (int w = 0; w < n && ready; ++w) {
                    if (w == v || graph.adjacent(v, w)) continue;
                    ready = pos[w] < col[w].size() && col[w][pos[w]] == 0;
                }
                if (!ready) continue;
                if (best == -1) {
                    best = v;
                } else {
                    Letter cand = make_letter(v, col[v][pos[v]]);
                    Letter cur = make_letter(best, col[best][pos[best]]);
                    if (letter_rank(cand) < letter_rank(cur)) best = v;
                }
            }
            if (best == -1) throw PreconditionError("piling extraction deadlock");
            out.letters.push_back(make_letter(best, col[best][pos[best]]));
            ++pos[best];
            --remaining;
            for (int w = 0; w < n; ++w) {
                if (w == best || graph.adjacent(best, w)) continue;
                ++pos[w];
                --remaining;
            }
        }
        return out;
    }
};

}  // namespace

NormalForm nf_raag(const DefiningGraph& graph, const Word& w) {
    check_word(graph, w);
    if (graph.edgeless()) return free_reduce(w);
    Piling p(graph);
    for (Letter l : w.letters) p.push(l);
    return NormalForm{p.extract()};
}

std::uint64_t support_mask(const NormalForm& nf) {
    std::uint64_t m = 0;
    for (Letter l : nf.word.letters) m |= std::uint64_t{1} << gen_of(l);
    return m;
}

std::vector<int> support(const NormalForm& nf) {
    std::uint64_t m = support_mask(nf);
    std::vector<int> out;
    for (int v = 0; v < 64; ++v)
        if ((m >> v) & 1) out.push_back(v);
    return out;
}

bool is_in_parabolic(const DefiningGraph& graph, const Word& g, std::uint64_t gens_mask) {
    return (support_mask(nf_raag(graph, g)) & ~gens_mask) == 0;
}

namespace {

// Letters of `w` (reduced) that can be commuted to the far end and whose
// generator lies in `s_mask`; removal is iterated to a fixpoint.  Returns the
// kept subword and the removed subword, both in original letter order.
std::pair<std::vector<Letter>, std::vector<Letter>> strip_end(const DefiningGraph& graph,
                                                              const std::vector<Letter>& letters,
                                                              std::uint64_t s_mask,
                                                              bool from_back) {
    std::vector<Letter> work = letters;
    std::vector<char> removed(work.size(), 0);
    bool changed = true;
    while (changed) {
        changed = false;
        if (from_back) {
            for (std::size_t i = work.size(); i-- > 0;) {
                if (removed[i]) continue;
                int v = gen_of(work[i]);
                if (!((s_mask >> v) & 1)) continue;
                bool movable = true;
                for (std::size_t j = i + 1; j < work.size() && movable; ++j)
                    if (!removed[j]) movable = graph.adjacent(v, gen_of(work[j]));
                if (movable) {
                    removed[i] = 1;
                    changed = true;
                }
            }
        } else {
            for (std::size_t i = 0; i < work.size(); ++i) {
                if (removed[i]) continue;
                int v = gen_of(work[i]);
                if (!((s_mask >> v) & 1)) continue;
                bool movable = true;
                for (std::size_t j = 0; j < i && movable; ++j)
                    if (!removed[j]) movable = graph.adjacent(v, gen_of(work[j]));
                if (movable) {
                    removed[i] = 1;
                    changed = true;
                }
            }
        }
    }
    std::vector<Letter> kept, gone;
    for (std::size_t i = 0; i < work.size(); ++i)
        (removed[i] ? gone : kept).push_back(work[i]);
    return {kept, gone};
}

}  // namespace

ParabolicSplit strip_parabolic_tail(const DefiningGraph& graph, const Word& g, std::uint64_t s_mask) {
    NormalForm nf = nf_raag(graph, g);
    auto [kept, gone] = strip_end(graph, nf.word.letters, s_mask, /*from_back=*/true);
    return ParabolicSplit{nf_raag(graph, Word{std::move(kept)}), nf_raag(graph, Word{std::move(gone)})};
}

ParabolicSplit strip_parabolic_head(const DefiningGraph& graph, const Word& g, std::uint64_t s_mask) {
    NormalForm nf = nf_raag(graph, g);
    auto [kept, gone] = strip_end(graph, nf.word.letters, s_mask, /*from_back=*/false);
    return ParabolicSplit{nf_raag(graph, Word{std::move(gone)}), nf_raag(graph, Word{std::move(kept)})};
}

bool commutes(const DefiningGraph& graph, const Word& g, const Word& h) {
    Word c = g.concat(h).concat(g.inverse_word()).concat(h.inverse_word());
    return nf_raag(graph, c).is_identity();
}

std::optional<std::vector<NormalForm>> parabolic_product_factor(
    const DefiningGraph& graph, const Word& w, const std::vector<std::uint64_t>& layer_masks) {
    std::vector<Letter> rest = nf_raag(graph, w).word.letters;
    std::vector<NormalForm> factors;
    factors.reserve(layer_masks.size());
    for (std::uint64_t mask : layer_masks) {
        auto [kept, gone] = strip_end(graph, rest, mask, /*from_back=*/false);
        factors.push_back(nf_raag(graph, Word{std::move(gone)}));
        rest = std::move(kept);
    }
    if (!rest.empty()) return std::nullopt;
    return factors;
}

std::vector<NormalForm> ball_enumerate(const DefiningGraph& graph, int radius, std::size_t cap) {
    if (radius < 0) throw PreconditionError("negative radius");
    std::vector<NormalForm> all{NormalForm{}};
    std::vector<NormalForm> layer{NormalForm{}};
    for (int r = 1; r <= radius; ++r) {
        std::vector<NormalForm> next;
        for (const NormalForm& nf : layer) {
            for (int v = 0; v < graph.size(); ++v) {
                for (int s : {+1, -1}) {
                    Word w = nf.word;
                    w.letters.push_back(make_letter(v, s));
                    NormalForm cand = nf_raag(graph, w);
                    if (cand.length() == static_cast<std::size_t>(r)) next.push_back(std::move(cand));
                }
            }
        }
        std::sort(next.begin(), next.end(),
                  [](const NormalForm& a, const NormalForm& b) { return shortlex_less(a.word, b.word); });
        next.erase(std::unique(next.begin(), next.end()), next.end());
        if (all.size() + next.size() > cap)
            throw ResourceLimitError("ball enumeration exceeds cap of " + std::to_string(cap));
        all.insert(all.end(), next.begin(), next.end());
        layer = std::move(next);
        if (layer.empty()) break;
    }
    return all;
}

std::string format_word(const Word& w, const std::vector<std::string>& names) {
    if (w.empty()) return "1";
    std::ostringstream os;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) os << ' ';
        Letter l = w.letters[i];
        int g = gen_of(l);
        if (g < static_cast<int>(names.size()))
            os << names[g];
        else
            os << 'x' << g;
        if (l < 0) os << "^-1";
    }
    return os.str();
}

Word parse_word(const std::string& text, const std::vector<std::string>& names, int alphabet_size) {
    Word out;
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) {
        if (tok == "1") continue;
        int exp = 1;
        auto caret = tok.find('^');
        std::string base = tok;
        if (caret != std::string::npos) {
            base = tok.substr(0, caret);
            try {
                exp = std::stoi(tok.substr(caret + 1));
            } catch (const std::exception&) {
                throw MalformedError("bad exponent in token '" + tok + "'");
            }
        }
        int gen = -1;
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == base) gen = static_cast<int>(i);
        if (gen < 0 && base.size() >= 2 && base[0] == 'x' &&
            std::all_of(base.begin() + 1, base.end(), [](char c) { return std::isdigit(c); }))
            gen = std::stoi(base.substr(1));
        if (gen < 0 && names.empty() && base.size() == 1 && base[0] >= 'a' && base[0] <= 'z')
            gen = base[0] - 'a';
        if (gen < 0 || gen >= alphabet_size)
            throw MalformedError("unknown generator '" + base + "'");
        int sign = exp >= 0 ? +1 : -1;
        for (int i = 0; i < std::abs(exp); ++i) out.letters.push_back(make_letter(gen, sign));
    }
    return out;
}

}  // namespace cosetc
