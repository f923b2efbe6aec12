#include "cosetc/rational.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <queue>
#include <set>

namespace cosetc {

namespace {

std::vector<int> eps_closure(const std::vector<std::vector<int>>& eps, int start) {
    std::vector<int> out{start};
    std::set<int> seen{start};
    for (std::size_t i = 0; i < out.size(); ++i)
        for (int t : eps[out[i]])
            if (seen.insert(t).second) out.push_back(t);
    return out;
}

}  // namespace

ReducedNfa ReducedNfa::empty_language(int rank) {
    ReducedNfa n;
    n.rank_ = rank;
    n.initial_ = 0;
    n.accepting_.assign(1, 0);
    n.trans_.resize(1);
    n.eps_.resize(1);
    n.reduced_ = true;
    return n;
}

ReducedNfa ReducedNfa::single_word(int rank, const Word& w) {
    ReducedNfa n;
    n.rank_ = rank;
    n.initial_ = 0;
    int states = static_cast<int>(w.size()) + 1;
    n.trans_.resize(states);
    n.eps_.resize(states);
    n.accepting_.assign(states, 0);
    n.accepting_[states - 1] = 1;
    for (std::size_t i = 0; i < w.size(); ++i)
        n.trans_[i].push_back({w.letters[i], static_cast<int>(i) + 1});
    return n;
}

ReducedNfa ReducedNfa::coset(const CoreGraph& p, const Word& prefix) {
    ReducedNfa n;
    n.rank_ = p.rank_alphabet();
    Word pre = free_reduce(prefix).word;
    int core_states = p.vertex_count();
    int chain = static_cast<int>(pre.size());
    int states = core_states + chain;  // chain states precede the core entry
    n.trans_.resize(states);
    n.eps_.resize(states);
    n.accepting_.assign(states, 0);
    // Chain: state core_states + i reads pre[i]; the last chain letter lands
    // on the basepoint.
    for (int i = 0; i < chain; ++i) {
        int from = core_states + i;
        int to = (i + 1 == chain) ? p.basepoint() : core_states + i + 1;
        n.trans_[from].push_back({pre.letters[i], to});
    }
    for (int v = 0; v < core_states; ++v)
        for (int g = 0; g < n.rank_; ++g) {
            int w = p.graph().out[v][g];
            if (w >= 0) {
                n.trans_[v].push_back({make_letter(g, +1), w});
                n.trans_[w].push_back({make_letter(g, -1), v});
            }
        }
    n.initial_ = chain > 0 ? core_states : p.basepoint();
    n.accepting_[p.basepoint()] = 1;
    return n;
}

ReducedNfa ReducedNfa::double_coset(const CoreGraph& p1, const Word& middle, const CoreGraph& p2) {
    if (p1.rank_alphabet() != p2.rank_alphabet())
        throw PreconditionError("double_coset: mixed alphabets");
    ReducedNfa n;
    n.rank_ = p1.rank_alphabet();
    Word mid = free_reduce(middle).word;
    int n1 = p1.vertex_count();
    int n2 = p2.vertex_count();
    int chain = std::max(0, static_cast<int>(mid.size()) - 1);
    int states = n1 + n2 + chain;
    n.trans_.resize(states);
    n.eps_.resize(states);
    n.accepting_.assign(states, 0);
    auto core2 = [&](int v) { return n1 + v; };
    for (int v = 0; v < n1; ++v)
        for (int g = 0; g < n.rank_; ++g) {
            int w = p1.graph().out[v][g];
            if (w >= 0) {
                n.trans_[v].push_back({make_letter(g, +1), w});
                n.trans_[w].push_back({make_letter(g, -1), v});
            }
        }
    for (int v = 0; v < n2; ++v)
        for (int g = 0; g < n.rank_; ++g) {
            int w = p2.graph().out[v][g];
            if (w >= 0) {
                n.trans_[core2(v)].push_back({make_letter(g, +1), core2(w)});
                n.trans_[core2(w)].push_back({make_letter(g, -1), core2(v)});
            }
        }
    if (mid.empty()) {
        n.eps_[p1.basepoint()].push_back(core2(p2.basepoint()));
    } else {
        int prev = p1.basepoint();
        for (std::size_t i = 0; i < mid.size(); ++i) {
            int to = (i + 1 == mid.size()) ? core2(p2.basepoint())
                                           : n1 + n2 + static_cast<int>(i);
            n.trans_[prev].push_back({mid.letters[i], to});
            prev = to;
        }
    }
    n.initial_ = p1.basepoint();
    n.accepting_[core2(p2.basepoint())] = 1;
    return n;
}

void ReducedNfa::trim() {
    int n = state_count();
    std::vector<char> fwd(n, 0), bwd(n, 0);
    std::vector<int> stack{initial_};
    fwd[initial_] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (auto [l, t] : trans_[v])
            if (!fwd[t]) {
                fwd[t] = 1;
                stack.push_back(t);
            }
        for (int t : eps_[v])
            if (!fwd[t]) {
                fwd[t] = 1;
                stack.push_back(t);
            }
    }
    std::vector<std::vector<int>> rev(n);
    for (int v = 0; v < n; ++v) {
        for (auto [l, t] : trans_[v]) rev[t].push_back(v);
        for (int t : eps_[v]) rev[t].push_back(v);
    }
    for (int v = 0; v < n; ++v)
        if (accepting_[v] && !bwd[v]) {
            bwd[v] = 1;
            stack.push_back(v);
        }
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int u : rev[v])
            if (!bwd[u]) {
                bwd[u] = 1;
                stack.push_back(u);
            }
    }
    std::vector<int> id(n, -1);
    int next = 0;
    for (int v = 0; v < n; ++v)
        if (fwd[v] && bwd[v]) id[v] = next++;
    if (id[initial_] < 0) {
        // Empty language; keep a single dead state.
        ReducedNfa e = empty_language(rank_);
        e.reduced_ = reduced_;
        *this = std::move(e);
        return;
    }
    std::vector<std::vector<std::pair<Letter, int>>> trans(next);
    std::vector<std::vector<int>> eps(next);
    std::vector<char> acc(next, 0);
    for (int v = 0; v < n; ++v) {
        if (id[v] < 0) continue;
        acc[id[v]] = accepting_[v];
        for (auto [l, t] : trans_[v])
            if (id[t] >= 0) trans[id[v]].push_back({l, id[t]});
        for (int t : eps_[v])
            if (id[t] >= 0) eps[id[v]].push_back(id[t]);
    }
    initial_ = id[initial_];
    trans_ = std::move(trans);
    eps_ = std::move(eps);
    accepting_ = std::move(acc);
}

ReducedNfa ReducedNfa::benois_reduce(const RationalOptions& opts) const {
    ReducedNfa sat = *this;
    // Saturation: whenever p --a--> q ~eps~> r --a^-1--> s, add eps p -> s.
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<std::vector<int>> closures(sat.state_count());
        for (int v = 0; v < sat.state_count(); ++v) closures[v] = eps_closure(sat.eps_, v);
        for (int p = 0; p < sat.state_count() && !changed; ++p) {
            for (auto [a, q] : sat.trans_[p]) {
                for (int r : closures[q]) {
                    for (auto [b, s] : sat.trans_[r]) {
                        if (b != -a) continue;
                        auto& ep = sat.eps_[p];
                        bool direct = (p == s) || std::find(ep.begin(), ep.end(), s) != ep.end();
                        if (!direct) {
                            ep.push_back(s);
                            changed = true;
                        }
                    }
                }
                if (changed) break;
            }
        }
    }

    // Restrict to reduced runs: pair each state with the last letter read.
    std::vector<std::vector<int>> closures(sat.state_count());
    for (int v = 0; v < sat.state_count(); ++v) closures[v] = eps_closure(sat.eps_, v);
    ReducedNfa out;
    out.rank_ = rank_;
    out.reduced_ = true;
    std::map<std::pair<int, int>, int> index;  // (state, last-letter code)
    auto code = [](Letter l) { return l == 0 ? 0 : 1 + letter_rank(l); };
    auto intern = [&](int state, int c) {
        auto [it, fresh] = index.try_emplace({state, c}, static_cast<int>(out.trans_.size()));
        if (fresh) {
            if (out.trans_.size() >= opts.state_cap)
                throw ResourceLimitError("benois_reduce exceeds state cap");
            out.trans_.emplace_back();
            out.eps_.emplace_back();
            bool acc = false;
            for (int r : closures[state]) acc = acc || sat.accepting_[r];
            out.accepting_.push_back(acc ? 1 : 0);
        }
        return it->second;
    };
    out.initial_ = intern(initial_, 0);
    std::queue<std::pair<int, int>> q;
    q.push({initial_, 0});
    std::set<std::pair<int, int>> seen{{initial_, 0}};
    while (!q.empty()) {
        auto [state, c] = q.front();
        q.pop();
        int from = intern(state, c);
        for (int r : closures[state]) {
            for (auto [a, t] : sat.trans_[r]) {
                if (c != 0) {
                    Letter last = make_letter((c - 1) / 2, ((c - 1) % 2) ? -1 : +1);
                    if (a == -last) continue;
                }
                int to = intern(t, code(a));
                out.trans_[from].push_back({a, to});
                if (seen.insert({t, code(a)}).second) q.push({t, code(a)});
            }
        }
    }
    for (auto& row : out.trans_) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    out.trim();
    return out;
}

ReducedNfa ReducedNfa::neighborhood(int r, const RationalOptions& opts) const {
    if (r < 0) throw PreconditionError("negative neighborhood radius");
    ReducedNfa n = *this;
    n.reduced_ = false;
    int base = n.state_count();
    for (int i = 0; i <= r; ++i) {
        n.trans_.emplace_back();
        n.eps_.emplace_back();
        n.accepting_.push_back(1);
    }
    for (int v = 0; v < base; ++v)
        if (n.accepting_[v]) {
            n.eps_[v].push_back(base);
            n.accepting_[v] = 0;
        }
    for (int i = 0; i < r; ++i)
        for (int g = 0; g < rank_; ++g)
            for (int s : {+1, -1}) n.trans_[base + i].push_back({make_letter(g, s), base + i + 1});
    return n.benois_reduce(opts);
}

ReducedNfa ReducedNfa::intersect(const ReducedNfa& other, const RationalOptions& opts) const {
    if (!reduced_ || !other.reduced_)
        throw PreconditionError("intersect requires reduced-form automata");
    if (rank_ != other.rank_) throw PreconditionError("intersect: mixed alphabets");
    ReducedNfa out;
    out.rank_ = rank_;
    out.reduced_ = true;
    std::map<std::pair<int, int>, int> index;
    auto intern = [&](int a, int b) {
        auto [it, fresh] = index.try_emplace({a, b}, static_cast<int>(out.trans_.size()));
        if (fresh) {
            if (out.trans_.size() >= opts.state_cap)
                throw ResourceLimitError("intersect exceeds state cap");
            out.trans_.emplace_back();
            out.eps_.emplace_back();
            out.accepting_.push_back(accepting_[a] && other.accepting_[b] ? 1 : 0);
        }
        return it->second;
    };
    out.initial_ = intern(initial_, other.initial_);
    std::queue<std::pair<int, int>> q;
    q.push({initial_, other.initial_});
    std::set<std::pair<int, int>> seen{{initial_, other.initial_}};
    while (!q.empty()) {
        auto [a, b] = q.front();
        q.pop();
        int from = intern(a, b);
        for (auto [l1, t1] : trans_[a])
            for (auto [l2, t2] : other.trans_[b]) {
                if (l1 != l2) continue;
                int to = intern(t1, t2);
                out.trans_[from].push_back({l1, to});
                if (seen.insert({t1, t2}).second) q.push({t1, t2});
            }
    }
    out.trim();
    return out;
}

bool ReducedNfa::accepts(const Word& w) const {
    std::set<int> cur;
    for (int s : eps_closure(eps_, initial_)) cur.insert(s);
    for (Letter l : w.letters) {
        std::set<int> next;
        for (int s : cur)
            for (auto [a, t] : trans_[s])
                if (a == l)
                    for (int u : eps_closure(eps_, t)) next.insert(u);
        cur = std::move(next);
        if (cur.empty()) return false;
    }
    for (int s : cur)
        if (accepting_[s]) return true;
    return false;
}

bool ReducedNfa::is_empty() const {
    std::vector<char> seen(state_count(), 0);
    std::vector<int> stack{initial_};
    seen[initial_] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        if (accepting_[v]) return false;
        for (auto [l, t] : trans_[v])
            if (!seen[t]) {
                seen[t] = 1;
                stack.push_back(t);
            }
        for (int t : eps_[v])
            if (!seen[t]) {
                seen[t] = 1;
                stack.push_back(t);
            }
    }
    return true;
}

bool ReducedNfa::is_infinite() const {
    ReducedNfa t = *this;
    t.trim();
    if (t.is_empty()) return false;
    // Tarjan SCC; the language is infinite iff some SCC of the trimmed
    // automaton contains a letter transition.
    int n = t.state_count();
    std::vector<int> idx(n, -1), low(n, 0), on(n, 0), comp(n, -1);
    std::vector<int> stack;
    int counter = 0, comps = 0;
    struct Frame {
        int v;
        std::size_t edge;
    };
    for (int root = 0; root < n; ++root) {
        if (idx[root] >= 0) continue;
        std::vector<Frame> call{{root, 0}};
        idx[root] = low[root] = counter++;
        stack.push_back(root);
        on[root] = 1;
        while (!call.empty()) {
            auto& f = call.back();
            int v = f.v;
            std::size_t total = t.trans_[v].size() + t.eps_[v].size();
            if (f.edge < total) {
                int w = f.edge < t.trans_[v].size()
                            ? t.trans_[v][f.edge].second
                            : t.eps_[v][f.edge - t.trans_[v].size()];
                ++f.edge;
                if (idx[w] < 0) {
                    idx[w] = low[w] = counter++;
                    stack.push_back(w);
                    on[w] = 1;
                    call.push_back({w, 0});
                } else if (on[w]) {
                    low[v] = std::min(low[v], idx[w]);
                }
            } else {
                if (low[v] == idx[v]) {
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on[w] = 0;
                        comp[w] = comps;
                        if (w == v) break;
                    }
                    ++comps;
                }
                call.pop_back();
                if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
            }
        }
    }
    for (int v = 0; v < n; ++v)
        for (auto [l, w] : t.trans_[v])
            if (comp[v] == comp[w]) return true;
    return false;
}

std::optional<int> ReducedNfa::shortest_length() const {
    // 0-1 BFS, eps edges free.
    std::vector<int> dist(state_count(), -1);
    std::deque<int> dq{initial_};
    dist[initial_] = 0;
    while (!dq.empty()) {
        int v = dq.front();
        dq.pop_front();
        for (int t : eps_[v])
            if (dist[t] < 0 || dist[t] > dist[v]) {
                dist[t] = dist[v];
                dq.push_front(t);
            }
        for (auto [l, t] : trans_[v])
            if (dist[t] < 0 || dist[t] > dist[v] + 1) {
                dist[t] = dist[v] + 1;
                dq.push_back(t);
            }
    }
    std::optional<int> best;
    for (int v = 0; v < state_count(); ++v)
        if (accepting_[v] && dist[v] >= 0 && (!best || dist[v] < *best)) best = dist[v];
    return best;
}

std::optional<Word> ReducedNfa::shortlex_least() const {
    if (!reduced_) throw PreconditionError("shortlex_least requires reduced form");
    // Distance from each state to acceptance.
    int n = state_count();
    std::vector<int> dist(n, -1);
    std::vector<std::vector<std::pair<Letter, int>>> rev(n);
    for (int v = 0; v < n; ++v)
        for (auto [l, t] : trans_[v]) rev[t].push_back({l, v});
    std::queue<int> q;
    for (int v = 0; v < n; ++v)
        if (accepting_[v]) {
            dist[v] = 0;
            q.push(v);
        }
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (auto [l, u] : rev[v])
            if (dist[u] < 0) {
                dist[u] = dist[v] + 1;
                q.push(u);
            }
    }
    if (dist[initial_] < 0) return std::nullopt;
    // Greedy least-letter walk along distance-decreasing edges.  Several
    // states can realize the same least letter, so track the frontier set.
    Word out;
    std::set<int> frontier{initial_};
    int remaining = dist[initial_];
    while (remaining > 0) {
        Letter best = 0;
        for (int v : frontier)
            for (auto [l, t] : trans_[v])
                if (dist[t] == remaining - 1 && (best == 0 || letter_rank(l) < letter_rank(best)))
                    best = l;
        std::set<int> next;
        for (int v : frontier)
            for (auto [l, t] : trans_[v])
                if (l == best && dist[t] == remaining - 1) next.insert(t);
        out.letters.push_back(best);
        frontier = std::move(next);
        --remaining;
    }
    return out;
}

bool ReducedNfa::included_in(const ReducedNfa& other, const RationalOptions& opts) const {
    if (!reduced_ || !other.reduced_)
        throw PreconditionError("included_in requires reduced-form automata");
    // Antichain-pruned forward simulation of the subset construction.
    using StateSet = std::vector<int>;
    std::map<int, std::vector<StateSet>> visited;
    auto subsumed = [&](int s, const StateSet& set) {
        for (const StateSet& old : visited[s])
            if (std::includes(set.begin(), set.end(), old.begin(), old.end())) return true;
        return false;
    };
    std::queue<std::pair<int, StateSet>> q;
    StateSet init{other.initial_};
    q.push({initial_, init});
    visited[initial_].push_back(init);
    std::size_t explored = 0;
    while (!q.empty()) {
        auto [s, set] = q.front();
        q.pop();
        if (++explored > opts.state_cap)
            throw ResourceLimitError("inclusion check exceeds state cap");
        if (accepting_[s]) {
            bool any = false;
            for (int b : set) any = any || other.accepting_[b];
            if (!any) return false;
        }
        std::map<Letter, StateSet> step_other;
        for (int b : set)
            for (auto [l, t] : other.trans_[b]) step_other[l].push_back(t);
        for (auto& [l, succ] : step_other) {
            std::sort(succ.begin(), succ.end());
            succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
        }
        for (auto [l, t] : trans_[s]) {
            StateSet succ;
            auto it = step_other.find(l);
            if (it != step_other.end()) succ = it->second;
            if (succ.empty() && accepting_rec(t)) return false;
            if (!subsumed(t, succ)) {
                visited[t].push_back(succ);
                q.push({t, succ});
            }
        }
    }
    return true;
}

// Is any accepting state reachable from s?  (Memoless DFS; automata are small
// and trimmed before inclusion checks in practice.)
bool ReducedNfa::accepting_rec(int s) const {
    std::vector<char> seen(state_count(), 0);
    std::vector<int> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        if (accepting_[v]) return true;
        for (auto [l, t] : trans_[v])
            if (!seen[t]) {
                seen[t] = 1;
                stack.push_back(t);
            }
        for (int t : eps_[v])
            if (!seen[t]) {
                seen[t] = 1;
                stack.push_back(t);
            }
    }
    return false;
}

int coset_distance_free(const CoreGraph& p1, const Word& g1, const CoreGraph& p2, const Word& g2,
                        const RationalOptions& opts) {
    Word middle = free_reduce(g1.inverse_word().concat(g2)).word;
    ReducedNfa dc = ReducedNfa::double_coset(p1, middle, p2).benois_reduce(opts);
    auto len = dc.shortest_length();
    if (!len) throw PreconditionError("double coset automaton is empty");
    return *len;
}

bool ktau_simplex_free(const std::vector<CoreGraph>& peripherals,
                       const std::vector<FreeCoset>& cosets, int tau,
                       const RationalOptions& opts) {
    if (cosets.empty()) throw PreconditionError("ktau_simplex_free: no cosets");
    std::optional<ReducedNfa> acc;
    for (const FreeCoset& c : cosets) {
        ReducedNfa nb = ReducedNfa::coset(peripherals.at(c.subgroup), c.rep).neighborhood(tau, opts);
        acc = acc ? acc->intersect(nb, opts) : nb;
    }
    return acc->is_infinite();
}

bool hausdorff_within_free(const CoreGraph& p1, const Word& g1, const CoreGraph& p2,
                           const Word& g2, int r, const RationalOptions& opts) {
    ReducedNfa a = ReducedNfa::coset(p1, g1).benois_reduce(opts);
    ReducedNfa b = ReducedNfa::coset(p2, g2).benois_reduce(opts);
    ReducedNfa na = ReducedNfa::coset(p1, g1).neighborhood(r, opts);
    ReducedNfa nb = ReducedNfa::coset(p2, g2).neighborhood(r, opts);
    return a.included_in(nb, opts) && b.included_in(na, opts);
}

}  // namespace cosetc
