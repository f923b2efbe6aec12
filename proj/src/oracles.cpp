#include "cosetc/oracles.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace cosetc {

// ---------------------------------------------------------------------------
// Exact rational / affine arithmetic for BS(1,k).

namespace {
long long gcd_ll(long long a, long long b) {
    while (b) {
        long long t = a % b;
        a = b;
        b = t;
    }
    return a < 0 ? -a : a;
}
}  // namespace

Fraction Fraction::of(long long n, long long d) {
    if (d == 0) throw PreconditionError("fraction with zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    long long g = gcd_ll(n, d);
    if (g == 0) return Fraction{0, 1};
    return Fraction{n / g, d / g};
}

Fraction Fraction::plus(const Fraction& o) const {
    return Fraction::of(num * o.den + o.num * den, den * o.den);
}

Fraction Fraction::times(const Fraction& o) const {
    return Fraction::of(num * o.num, den * o.den);
}

std::string Fraction::str() const {
    std::ostringstream os;
    os << num;
    if (den != 1) os << '/' << den;
    return os.str();
}

bool Affine::operator<(const Affine& o) const {
    if (scale_exp != o.scale_exp) return scale_exp < o.scale_exp;
    long long lhs = offset.num * o.offset.den;
    long long rhs = o.offset.num * offset.den;
    return lhs < rhs;
}

namespace {
Fraction pow_frac(int k, int e) {
    long long p = 1;
    for (int i = 0; i < (e < 0 ? -e : e); ++i) p *= k;
    return e >= 0 ? Fraction::of(p) : Fraction::of(1, p);
}
}  // namespace

Affine affine_of_letter(int k, Letter l) {
    (void)k;
    int g = gen_of(l);
    if (g == 0) return Affine{0, Fraction::of(sign_of(l))};
    if (g == 1) return Affine{sign_of(l), Fraction::of(0)};
    throw MalformedError("BS(1,k) words use generators a and t only");
}

Affine affine_compose(int k, const Affine& outer, const Affine& inner) {
    // (outer o inner)(x) = k^mo (k^mi x + ri) + ro.
    Affine out;
    out.scale_exp = outer.scale_exp + inner.scale_exp;
    out.offset = inner.offset.times(pow_frac(k, outer.scale_exp)).plus(outer.offset);
    return out;
}

Affine affine_of_word(int k, const Word& w) {
    Affine acc;  // identity
    for (Letter l : w.letters) acc = affine_compose(k, acc, affine_of_letter(k, l));
    return acc;
}

Affine affine_inverse(int k, const Affine& a) {
    Affine out;
    out.scale_exp = -a.scale_exp;
    out.offset = a.offset.times(pow_frac(k, -a.scale_exp)).times(Fraction::of(-1));
    return out;
}

namespace {

Affine affine_pow(int k, const Affine& a, long long j) {
    Affine base = j >= 0 ? a : affine_inverse(k, a);
    long long n = j >= 0 ? j : -j;
    Affine acc;
    for (long long i = 0; i < n; ++i) acc = affine_compose(k, acc, base);
    return acc;
}

// Membership z in <U>, exact: returns the power when it exists.
std::optional<long long> power_in_cyclic(int k, const Affine& u, const Affine& z) {
    if (u.is_identity()) return z.is_identity() ? std::optional<long long>(0) : std::nullopt;
    if (z.is_identity()) return 0;
    if (u.scale_exp == 0) {
        if (z.scale_exp != 0) return std::nullopt;
        Fraction ratio = z.offset.times(Fraction::of(u.offset.den, u.offset.num));
        if (ratio.den != 1) return std::nullopt;
        return ratio.num;
    }
    if (z.scale_exp % u.scale_exp != 0) return std::nullopt;
    long long j = z.scale_exp / u.scale_exp;
    if (affine_pow(k, u, j) == z) return j;
    return std::nullopt;
}

// Fixed point of a non-translation affine map: x = r / (1 - k^m).
Fraction fixed_point(int k, const Affine& a) {
    Fraction denom = Fraction::of(1).plus(pow_frac(k, a.scale_exp).times(Fraction::of(-1)));
    return a.offset.times(Fraction::of(denom.den, denom.num));
}

}  // namespace

// ---------------------------------------------------------------------------
// RAAG criteria.

namespace {
void require_raag_hypotheses(const DefiningGraph& g) {
    if (!g.triangle_free())
        throw CapabilityError("RAAG criterion needs a triangle-free defining graph");
    if (g.min_valence() < 2)
        throw CapabilityError("RAAG criterion needs minimal valence >= 2");
}

void verify_in_conjugate(const DefiningGraph& graph, const Word& witness, const Word& g,
                         std::uint64_t gens_mask, const char* what) {
    Word t = g.inverse_word().concat(witness).concat(g);
    if (!is_in_parabolic(graph, t, gens_mask))
        throw PreconditionError(std::string("RAAG witness failed verification: ") + what);
}
}  // namespace

RaagEdgeVerdict raag_edge_criterion(const DefiningGraph& graph, std::pair<int, int> p1,
                                    const Word& g1, std::pair<int, int> p2, const Word& g2) {
    require_raag_hypotheses(graph);
    std::uint64_t m1 = (std::uint64_t{1} << p1.first) | (std::uint64_t{1} << p1.second);
    std::uint64_t m2 = (std::uint64_t{1} << p2.first) | (std::uint64_t{1} << p2.second);
    Word diff = g1.inverse_word().concat(g2);
    if (m1 == m2 && is_in_parabolic(graph, diff, m1))
        throw PreconditionError("raag_edge_criterion: cosets are equal");
    RaagEdgeVerdict v;
    std::uint64_t shared = m1 & m2;
    std::uint64_t diff_support = support_mask(nf_raag(graph, diff));
    for (int vgen = 0; vgen < graph.size(); ++vgen) {
        if (!((shared >> vgen) & 1)) continue;
        if ((diff_support & ~graph.star_mask(vgen)) != 0) continue;
        v.edge = true;
        v.witness_generator = vgen;
        Word conj = g1.concat(Word{{make_letter(vgen, +1)}}).concat(g1.inverse_word());
        v.witness_element = nf_raag(graph, conj).word;
        verify_in_conjugate(graph, v.witness_element, g1, m1, "edge, first coset");
        verify_in_conjugate(graph, v.witness_element, g2, m2, "edge, second coset");
        return v;
    }
    return v;
}

RaagSimplexVerdict raag_simplex_test(
    const DefiningGraph& graph,
    const std::vector<std::pair<std::pair<int, int>, Word>>& cosets) {
    require_raag_hypotheses(graph);
    if (cosets.empty()) throw PreconditionError("raag_simplex_test: no cosets");
    RaagSimplexVerdict out;
    std::uint64_t shared = ~std::uint64_t{0};
    for (const auto& [pair, g] : cosets)
        shared &= (std::uint64_t{1} << pair.first) | (std::uint64_t{1} << pair.second);
    const Word& g1 = cosets.front().second;
    for (int vgen = 0; vgen < graph.size(); ++vgen) {
        if (!((shared >> vgen) & 1)) continue;
        bool ok = true;
        for (std::size_t i = 1; i < cosets.size() && ok; ++i) {
            Word diff = g1.inverse_word().concat(cosets[i].second);
            ok = (support_mask(nf_raag(graph, diff)) & ~graph.star_mask(vgen)) == 0;
        }
        if (!ok) continue;
        out.simplex = true;
        out.witness_generator = vgen;
        Word conj = g1.concat(Word{{make_letter(vgen, +1)}}).concat(g1.inverse_word());
        out.witness_element = nf_raag(graph, conj).word;
        for (const auto& [pair, g] : cosets) {
            std::uint64_t m = (std::uint64_t{1} << pair.first) | (std::uint64_t{1} << pair.second);
            verify_in_conjugate(graph, out.witness_element, g, m, "simplex");
        }
        return out;
    }
    return out;
}

StarEdgeVerdict raag_star_edge(const DefiningGraph& graph, int a, const Word& g1, int b,
                               const Word& g2) {
    require_raag_hypotheses(graph);
    StarEdgeVerdict out;
    Word diff = g1.inverse_word().concat(g2);
    std::uint64_t shared = graph.star_mask(a) & graph.star_mask(b);
    for (int x = 0; x < graph.size(); ++x) {
        if (!((shared >> x) & 1)) continue;
        auto factors = parabolic_product_factor(
            graph, diff, {graph.star_mask(a), graph.star_mask(x), graph.star_mask(b)});
        if (!factors) continue;
        out.edge = true;
        out.witness_generator = x;
        out.alpha = (*factors)[0];
        out.middle = (*factors)[1];
        out.beta = (*factors)[2];
        // The element (g1 alpha middle) x (g1 alpha middle)^-1 lies in both
        // conjugated star subgroups; check both memberships directly.
        Word h = g1.concat(out.alpha.word).concat(out.middle.word);
        Word witness = h.concat(Word{{make_letter(x, +1)}}).concat(h.inverse_word());
        verify_in_conjugate(graph, witness, g1, graph.star_mask(a), "star edge, first");
        verify_in_conjugate(graph, witness, g2, graph.star_mask(b), "star edge, second");
        return out;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Shared helpers.

namespace {

std::vector<CosetId> dedupe_cosets(const std::vector<CosetId>& cosets) {
    std::vector<CosetId> out = cosets;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::string> default_names(const std::string& stem, int n) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(stem + std::to_string(i));
    return out;
}

// ---------------------------------------------------------------------------
// Free-group backend.

class FreeOracle final : public PairOracle {
  public:
    FreeOracle(int rank, std::vector<std::vector<Word>> peripheral_words,
               std::vector<std::string> names)
        : rank_(rank), names_(std::move(names)) {
        if (names_.empty()) names_ = default_names("x", rank);
        for (auto& gens : peripheral_words) {
            CoreGraph c = CoreGraph::of_subgroup(rank, gens);
            if (c.trivial())
                throw MalformedError("peripheral subgroup is finite (trivial core graph)");
            generator_words_.push_back(gens);
            cores_.push_back(std::move(c));
        }
        if (cores_.empty()) throw MalformedError("free pair needs at least one peripheral");
        caps_.exact_intersection = true;
        caps_.exact_coset_distance = true;
        caps_.ktau_supported = true;
        caps_.simplex_witnesses = true;
    }

    const OracleCapabilities& capabilities() const override { return caps_; }
    std::string describe() const override {
        return "free group of rank " + std::to_string(rank_);
    }
    int alphabet_size() const override { return rank_; }
    const std::vector<std::string>& generator_names() const override { return names_; }
    int peripheral_count() const override { return static_cast<int>(cores_.size()); }
    std::string peripheral_label(int p) const override {
        std::string out = "<";
        for (std::size_t i = 0; i < generator_words_[p].size(); ++i) {
            if (i) out += ", ";
            out += format_word(generator_words_[p][i], names_);
        }
        return out + ">";
    }

    NormalForm normalize(const Word& g) const override { return free_reduce(g); }

    CosetId canonical_coset(int p, const Word& g) const override {
        CosetId c;
        c.peripheral = p;
        c.rep = cores_.at(p).coset_min_rep(g);
        return c;
    }

    bool infinite_intersection(const std::vector<CosetId>& cosets,
                               Witness* witness) const override {
        auto set = dedupe_cosets(cosets);
        std::vector<FreeCoset> fc;
        for (const auto& c : set) fc.push_back({c.peripheral, c.rep});
        auto result = infinite_intersection_free(cores_, fc);
        if (result.infinite && witness) witness->element = result.element;
        return result.infinite;
    }

    bool member_of_conjugate(const CosetId& c, const Word& element) const override {
        return cores_.at(c.peripheral)
            .member(c.rep.inverse_word().concat(element).concat(c.rep));
    }

    std::vector<CosetId> enumerate_cosets(int radius, const EnumOptions& opts) const override {
        std::set<CosetId> out;
        for (const auto& nf : ball(radius, opts))
            for (int p = 0; p < peripheral_count(); ++p) {
                CosetId c = canonical_coset(p, nf.word);
                if (c.rep.size() <= static_cast<std::size_t>(radius)) out.insert(c);
                if (out.size() > opts.cap) throw ResourceLimitError("coset enumeration cap");
            }
        return {out.begin(), out.end()};
    }

    std::vector<NormalForm> ball(int radius, const EnumOptions& opts) const override {
        return ball_enumerate(DefiningGraph::free_group(rank_), radius, opts.cap);
    }

    std::optional<int> coset_distance(const CosetId& a, const CosetId& b) const override {
        return coset_distance_free(cores_.at(a.peripheral), a.rep, cores_.at(b.peripheral), b.rep);
    }

    std::optional<Word> double_coset_min_rep(const CosetId& a, const CosetId& b) const override {
        Word middle = free_reduce(a.rep.inverse_word().concat(b.rep)).word;
        ReducedNfa dc = ReducedNfa::double_coset(cores_.at(a.peripheral), middle,
                                                 cores_.at(b.peripheral))
                            .benois_reduce();
        return dc.shortlex_least();
    }

    bool peripherals_generate() const override {
        std::vector<Word> all;
        for (const auto& gens : generator_words_)
            all.insert(all.end(), gens.begin(), gens.end());
        CoreGraph joint = CoreGraph::of_subgroup(rank_, all);
        for (int g = 0; g < rank_; ++g)
            if (!joint.member(Word{{make_letter(g, +1)}})) return false;
        return true;
    }

    bool ktau_simplex(const std::vector<CosetId>& cosets, int tau) const override {
        auto set = dedupe_cosets(cosets);
        std::vector<FreeCoset> fc;
        for (const auto& c : set) fc.push_back({c.peripheral, c.rep});
        return ktau_simplex_free(cores_, fc, tau);
    }

  private:
    int rank_;
    std::vector<std::string> names_;
    std::vector<CoreGraph> cores_;
    std::vector<std::vector<Word>> generator_words_;
    OracleCapabilities caps_;
};

// ---------------------------------------------------------------------------
// RAAG backend with maximal standard abelian peripherals.

class RaagAbelianOracle final : public PairOracle {
  public:
    RaagAbelianOracle(DefiningGraph graph, std::vector<std::pair<int, int>> pairs,
                      std::vector<std::string> names)
        : graph_(std::move(graph)), pairs_(std::move(pairs)), names_(std::move(names)) {
        require_raag_hypotheses(graph_);
        if (names_.empty()) names_ = default_names("v", graph_.size());
        for (auto& [a, b] : pairs_) {
            if (a > b) std::swap(a, b);
            if (!graph_.adjacent(a, b))
                throw MalformedError("peripheral {" + std::to_string(a) + "," + std::to_string(b) +
                                     "} is not an edge of the defining graph");
        }
        std::sort(pairs_.begin(), pairs_.end());
        pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
        if (pairs_.empty()) throw MalformedError("RAAG pair needs at least one peripheral");
        caps_.exact_intersection = true;
        caps_.exact_coset_distance = true;
        caps_.simplex_witnesses = true;
    }

    const OracleCapabilities& capabilities() const override { return caps_; }
    std::string describe() const override {
        return "RAAG on " + std::to_string(graph_.size()) + " generators, maximal abelians";
    }
    int alphabet_size() const override { return graph_.size(); }
    const std::vector<std::string>& generator_names() const override { return names_; }
    int peripheral_count() const override { return static_cast<int>(pairs_.size()); }
    std::string peripheral_label(int p) const override {
        return "<" + names_[pairs_[p].first] + ", " + names_[pairs_[p].second] + ">";
    }
    const DefiningGraph& graph() const { return graph_; }
    std::pair<int, int> pair(int p) const { return pairs_[p]; }

    NormalForm normalize(const Word& g) const override { return nf_raag(graph_, g); }

    CosetId canonical_coset(int p, const Word& g) const override {
        CosetId c;
        c.peripheral = p;
        c.rep = strip_parabolic_tail(graph_, g, mask(p)).head.word;
        return c;
    }

    bool infinite_intersection(const std::vector<CosetId>& cosets,
                               Witness* witness) const override {
        auto set = dedupe_cosets(cosets);
        if (set.size() == 1) {
            if (witness) {
                int a = pairs_[set[0].peripheral].first;
                Word conj = set[0].rep.concat(Word{{make_letter(a, +1)}})
                                .concat(set[0].rep.inverse_word());
                witness->element = nf_raag(graph_, conj).word;
            }
            return true;
        }
        std::vector<std::pair<std::pair<int, int>, Word>> cs;
        for (const auto& c : set) cs.push_back({pairs_[c.peripheral], c.rep});
        auto verdict = raag_simplex_test(graph_, cs);
        if (verdict.simplex && witness) {
            witness->element = verdict.witness_element;
            witness->note = "axis generator " + names_[verdict.witness_generator];
        }
        return verdict.simplex;
    }

    bool member_of_conjugate(const CosetId& c, const Word& element) const override {
        Word t = c.rep.inverse_word().concat(element).concat(c.rep);
        return is_in_parabolic(graph_, t, mask(c.peripheral));
    }

    std::vector<CosetId> enumerate_cosets(int radius, const EnumOptions& opts) const override {
        std::set<CosetId> out;
        for (const auto& nf : ball(radius, opts))
            for (int p = 0; p < peripheral_count(); ++p) {
                CosetId c = canonical_coset(p, nf.word);
                if (c.rep.size() <= static_cast<std::size_t>(radius)) out.insert(c);
                if (out.size() > opts.cap) throw ResourceLimitError("coset enumeration cap");
            }
        return {out.begin(), out.end()};
    }

    std::vector<NormalForm> ball(int radius, const EnumOptions& opts) const override {
        return ball_enumerate(graph_, radius, opts.cap);
    }

    std::optional<int> coset_distance(const CosetId& a, const CosetId& b) const override {
        // min |p1 w p2| equals the residue after stripping the maximal
        // front-movable <S1> part and back-movable <S2> part.
        Word w = a.rep.inverse_word().concat(b.rep);
        NormalForm mid = strip_parabolic_head(graph_, w, mask(a.peripheral)).tail;
        NormalForm res = strip_parabolic_tail(graph_, mid.word, mask(b.peripheral)).head;
        return static_cast<int>(res.length());
    }

    std::optional<Word> double_coset_min_rep(const CosetId& a, const CosetId& b) const override {
        Word w = a.rep.inverse_word().concat(b.rep);
        NormalForm mid = strip_parabolic_head(graph_, w, mask(a.peripheral)).tail;
        return strip_parabolic_tail(graph_, mid.word, mask(b.peripheral)).head.word;
    }

    bool peripherals_generate() const override {
        std::uint64_t all = 0;
        for (auto [a, b] : pairs_) all |= (std::uint64_t{1} << a) | (std::uint64_t{1} << b);
        std::uint64_t want = graph_.size() == 64 ? ~std::uint64_t{0}
                                                 : (std::uint64_t{1} << graph_.size()) - 1;
        return all == want;
    }

  private:
    std::uint64_t mask(int p) const {
        return (std::uint64_t{1} << pairs_[p].first) | (std::uint64_t{1} << pairs_[p].second);
    }

    DefiningGraph graph_;
    std::vector<std::pair<int, int>> pairs_;
    std::vector<std::string> names_;
    OracleCapabilities caps_;
};

// ---------------------------------------------------------------------------
// RAAG backend with standard star peripherals (pairwise queries only).

class RaagStarOracle final : public PairOracle {
  public:
    RaagStarOracle(DefiningGraph graph, std::vector<std::string> names)
        : graph_(std::move(graph)), names_(std::move(names)) {
        require_raag_hypotheses(graph_);
        if (names_.empty()) names_ = default_names("v", graph_.size());
        caps_.exact_intersection = true;
        caps_.exact_coset_distance = true;
        caps_.simplex_witnesses = true;
        caps_.higher_simplices = false;
    }

    const OracleCapabilities& capabilities() const override { return caps_; }
    std::string describe() const override {
        return "RAAG on " + std::to_string(graph_.size()) + " generators, star subgroups";
    }
    int alphabet_size() const override { return graph_.size(); }
    const std::vector<std::string>& generator_names() const override { return names_; }
    int peripheral_count() const override { return graph_.size(); }
    std::string peripheral_label(int p) const override { return "<Star(" + names_[p] + ")>"; }
    const DefiningGraph& graph() const { return graph_; }

    NormalForm normalize(const Word& g) const override { return nf_raag(graph_, g); }

    CosetId canonical_coset(int p, const Word& g) const override {
        CosetId c;
        c.peripheral = p;
        c.rep = strip_parabolic_tail(graph_, g, graph_.star_mask(p)).head.word;
        return c;
    }

    bool infinite_intersection(const std::vector<CosetId>& cosets,
                               Witness* witness) const override {
        auto set = dedupe_cosets(cosets);
        if (set.size() == 1) {
            if (witness)
                witness->element =
                    nf_raag(graph_, set[0].rep.concat(Word{{make_letter(set[0].peripheral, +1)}})
                                        .concat(set[0].rep.inverse_word()))
                        .word;
            return true;
        }
        if (set.size() > 2)
            throw CapabilityError("star-subgroup oracle answers pairwise queries only");
        auto verdict =
            raag_star_edge(graph_, set[0].peripheral, set[0].rep, set[1].peripheral, set[1].rep);
        if (verdict.edge && witness) {
            Word h = set[0].rep.concat(verdict.alpha.word).concat(verdict.middle.word);
            witness->element =
                nf_raag(graph_, h.concat(Word{{make_letter(verdict.witness_generator, +1)}})
                                    .concat(h.inverse_word()))
                    .word;
            witness->note = "axis generator " + names_[verdict.witness_generator];
        }
        return verdict.edge;
    }

    bool member_of_conjugate(const CosetId& c, const Word& element) const override {
        Word t = c.rep.inverse_word().concat(element).concat(c.rep);
        return is_in_parabolic(graph_, t, graph_.star_mask(c.peripheral));
    }

    std::vector<CosetId> enumerate_cosets(int radius, const EnumOptions& opts) const override {
        std::set<CosetId> out;
        for (const auto& nf : ball(radius, opts))
            for (int p = 0; p < peripheral_count(); ++p) {
                CosetId c = canonical_coset(p, nf.word);
                if (c.rep.size() <= static_cast<std::size_t>(radius)) out.insert(c);
                if (out.size() > opts.cap) throw ResourceLimitError("coset enumeration cap");
            }
        return {out.begin(), out.end()};
    }

    std::vector<NormalForm> ball(int radius, const EnumOptions& opts) const override {
        return ball_enumerate(graph_, radius, opts.cap);
    }

    std::optional<int> coset_distance(const CosetId& a, const CosetId& b) const override {
        Word w = a.rep.inverse_word().concat(b.rep);
        NormalForm mid = strip_parabolic_head(graph_, w, graph_.star_mask(a.peripheral)).tail;
        NormalForm res =
            strip_parabolic_tail(graph_, mid.word, graph_.star_mask(b.peripheral)).head;
        return static_cast<int>(res.length());
    }

    std::optional<Word> double_coset_min_rep(const CosetId& a, const CosetId& b) const override {
        Word w = a.rep.inverse_word().concat(b.rep);
        NormalForm mid = strip_parabolic_head(graph_, w, graph_.star_mask(a.peripheral)).tail;
        return strip_parabolic_tail(graph_, mid.word, graph_.star_mask(b.peripheral)).head.word;
    }

    bool peripherals_generate() const override { return true; }  // each star holds its vertex

  private:
    DefiningGraph graph_;
    std::vector<std::string> names_;
    OracleCapabilities caps_;
};

// ---------------------------------------------------------------------------
// Lattice backend: Z^n with sublattice peripherals.

using Vec = std::vector<long long>;
using Mat = std::vector<Vec>;  // list of columns

Vec abelianize(int n, const Word& w) {
    Vec v(n, 0);
    for (Letter l : w.letters) v[gen_of(l)] += sign_of(l);
    return v;
}

Word vec_to_word(const Vec& v) {
    Word w;
    for (std::size_t g = 0; g < v.size(); ++g)
        for (long long i = 0; i < (v[g] < 0 ? -v[g] : v[g]); ++i)
            w.letters.push_back(make_letter(static_cast<int>(g), v[g] > 0 ? +1 : -1));
    return w;
}

// Column-style Hermite normal form (lower triangular, positive pivots).
Mat hnf(int n, Mat cols) {
    int pivot_col = 0;
    for (int row = 0; row < n && pivot_col < static_cast<int>(cols.size()); ++row) {
        int j = -1;
        for (int c = pivot_col; c < static_cast<int>(cols.size()); ++c)
            if (cols[c][row] != 0) {
                j = c;
                break;
            }
        if (j < 0) continue;
        std::swap(cols[pivot_col], cols[j]);
        for (int c = pivot_col + 1; c < static_cast<int>(cols.size()); ++c) {
            while (cols[c][row] != 0) {
                long long q = cols[pivot_col][row] / cols[c][row];
                for (int r = 0; r < n; ++r) cols[pivot_col][r] -= q * cols[c][r];
                std::swap(cols[pivot_col], cols[c]);
            }
        }
        if (cols[pivot_col][row] < 0)
            for (int r = 0; r < n; ++r) cols[pivot_col][r] = -cols[pivot_col][r];
        for (int c = 0; c < pivot_col; ++c) {
            long long q = cols[c][row] / cols[pivot_col][row];
            if (cols[c][row] % cols[pivot_col][row] < 0) --q;
            if (q != 0)
                for (int r = 0; r < n; ++r) cols[c][r] -= q * cols[pivot_col][r];
        }
        ++pivot_col;
    }
    cols.resize(pivot_col);
    return cols;
}

// Solve B y = x over the integers for lower-triangular HNF B.
bool lattice_member(int n, const Mat& basis, Vec x) {
    for (const Vec& col : basis) {
        int row = 0;
        while (row < n && col[row] == 0) ++row;
        if (row == n) continue;
        if (x[row] % col[row] != 0) continue;
        long long q = x[row] / col[row];
        for (int r = 0; r < n; ++r) x[r] -= q * col[r];
    }
    for (long long v : x)
        if (v != 0) return false;
    return true;
}

Vec lattice_residue(int n, const Mat& basis, Vec x) {
    for (const Vec& col : basis) {
        int row = 0;
        while (row < n && col[row] == 0) ++row;
        if (row == n) continue;
        long long q = x[row] / col[row];
        if (x[row] % col[row] < 0) --q;
        for (int r = 0; r < n; ++r) x[r] -= q * col[r];
    }
    return x;
}

// Intersection of two lattices via the integer kernel of [B | -C].
Mat lattice_intersect(int n, const Mat& b, const Mat& c) {
    int cols = static_cast<int>(b.size() + c.size());
    if (cols == 0) return {};
    Mat m(cols, Vec(n, 0));
    Mat u(cols, Vec(cols, 0));
    for (int i = 0; i < cols; ++i) u[i][i] = 1;
    for (std::size_t i = 0; i < b.size(); ++i)
        for (int r = 0; r < n; ++r) m[i][r] = b[i][r];
    for (std::size_t i = 0; i < c.size(); ++i)
        for (int r = 0; r < n; ++r) m[b.size() + i][r] = -c[i][r];
    int pivot_col = 0;
    for (int row = 0; row < n && pivot_col < cols; ++row) {
        int j = -1;
        for (int cc = pivot_col; cc < cols; ++cc)
            if (m[cc][row] != 0) {
                j = cc;
                break;
            }
        if (j < 0) continue;
        std::swap(m[pivot_col], m[j]);
        std::swap(u[pivot_col], u[j]);
        for (int cc = pivot_col + 1; cc < cols; ++cc) {
            while (m[cc][row] != 0) {
                long long q = m[pivot_col][row] / m[cc][row];
                for (int r = 0; r < n; ++r) m[pivot_col][r] -= q * m[cc][r];
                for (int r = 0; r < cols; ++r) u[pivot_col][r] -= q * u[cc][r];
                std::swap(m[pivot_col], m[cc]);
                std::swap(u[pivot_col], u[cc]);
            }
        }
        ++pivot_col;
    }
    Mat inter;
    for (int cc = pivot_col; cc < cols; ++cc) {
        bool zero = true;
        for (int r = 0; r < n; ++r) zero = zero && m[cc][r] == 0;
        if (!zero) continue;
        Vec x(n, 0);
        for (std::size_t i = 0; i < b.size(); ++i)
            for (int r = 0; r < n; ++r) x[r] += u[cc][i] * b[i][r];
        bool nonzero = false;
        for (long long vv : x) nonzero = nonzero || vv != 0;
        if (nonzero) inter.push_back(x);
    }
    return hnf(n, inter);
}

class LatticeOracle final : public PairOracle {
  public:
    LatticeOracle(int rank, std::vector<std::vector<Word>> peripheral_words,
                  std::vector<std::string> names)
        : rank_(rank), names_(std::move(names)) {
        if (names_.empty()) names_ = default_names("e", rank);
        DefiningGraph complete(rank);
        for (int a = 0; a < rank; ++a)
            for (int b = a + 1; b < rank; ++b) complete.add_edge(a, b);
        graph_ = complete;
        for (const auto& gens : peripheral_words) {
            Mat cols;
            for (const Word& w : gens) cols.push_back(abelianize(rank_, w));
            Mat basis = hnf(rank_, cols);
            if (basis.empty()) throw MalformedError("lattice peripheral is finite (rank zero)");
            labels_.push_back(gens);
            lattices_.push_back(std::move(basis));
        }
        if (lattices_.empty()) throw MalformedError("lattice pair needs at least one peripheral");
        caps_.exact_intersection = true;
        caps_.exact_coset_distance = true;
        caps_.simplex_witnesses = true;
    }

    const OracleCapabilities& capabilities() const override { return caps_; }
    std::string describe() const override { return "Z^" + std::to_string(rank_); }
    int alphabet_size() const override { return rank_; }
    const std::vector<std::string>& generator_names() const override { return names_; }
    int peripheral_count() const override { return static_cast<int>(lattices_.size()); }
    std::string peripheral_label(int p) const override {
        std::string out = "<";
        for (std::size_t i = 0; i < labels_[p].size(); ++i) {
            if (i) out += ", ";
            out += format_word(labels_[p][i], names_);
        }
        return out + ">";
    }

    NormalForm normalize(const Word& g) const override { return nf_raag(graph_, g); }

    CosetId canonical_coset(int p, const Word& g) const override {
        Vec x = abelianize(rank_, g);
        Vec res = lattice_residue(rank_, lattices_[p], x);
        long long norm = 0;
        for (long long v : res) norm += v < 0 ? -v : v;
        CosetId c;
        c.peripheral = p;
        c.rep = vec_to_word(res);
        // Minimal-length shortlex-least representative by ball search.
        for (const auto& nf : ball_enumerate(graph_, static_cast<int>(norm))) {
            Vec cand = abelianize(rank_, nf.word);
            Vec diff(rank_);
            for (int r = 0; r < rank_; ++r) diff[r] = cand[r] - res[r];
            if (lattice_member(rank_, lattices_[p], diff)) {
                c.rep = nf.word;
                break;
            }
        }
        std::ostringstream os;
        for (int r = 0; r < rank_; ++r) os << (r ? "," : "") << res[r];
        c.payload = os.str();
        return c;
    }

    bool infinite_intersection(const std::vector<CosetId>& cosets,
                               Witness* witness) const override {
        auto set = dedupe_cosets(cosets);
        Mat acc = lattices_[set[0].peripheral];
        for (std::size_t i = 1; i < set.size() && !acc.empty(); ++i)
            acc = lattice_intersect(rank_, acc, lattices_[set[i].peripheral]);
        if (acc.empty()) return false;
        if (witness) witness->element = vec_to_word(acc.front());
        return true;
    }

    bool member_of_conjugate(const CosetId& c, const Word& element) const override {
        return lattice_member(rank_, lattices_[c.peripheral], abelianize(rank_, element));
    }

    std::vector<CosetId> enumerate_cosets(int radius, const EnumOptions& opts) const override {
        std::set<CosetId> out;
        for (const auto& nf : ball(radius, opts))
            for (int p = 0; p < peripheral_count(); ++p) {
                CosetId c = canonical_coset(p, nf.word);
                if (c.rep.size() <= static_cast<std::size_t>(radius)) out.insert(c);
                if (out.size() > opts.cap) throw ResourceLimitError("coset enumeration cap");
            }
        return {out.begin(), out.end()};
    }

    std::vector<NormalForm> ball(int radius, const EnumOptions& opts) const override {
        return ball_enumerate(graph_, radius, opts.cap);
    }

    std::optional<int> coset_distance(const CosetId& a, const CosetId& b) const override {
        Mat sum = lattices_[a.peripheral];
        for (const Vec& col : lattices_[b.peripheral]) sum.push_back(col);
        sum = hnf(rank_, sum);
        Vec va = abelianize(rank_, a.rep), vb = abelianize(rank_, b.rep);
        Vec diff(rank_);
        for (int r = 0; r < rank_; ++r) diff[r] = vb[r] - va[r];
        Vec res = lattice_residue(rank_, sum, diff);
        long long norm = 0;
        for (long long v : res) norm += v < 0 ? -v : v;
        for (const auto& nf : ball_enumerate(graph_, static_cast<int>(norm))) {
            Vec cand = abelianize(rank_, nf.word);
            Vec d2(rank_);
            for (int r = 0; r < rank_; ++r) d2[r] = cand[r] - res[r];
            if (lattice_member(rank_, sum, d2)) return static_cast<int>(nf.length());
        }
        return static_cast<int>(norm);
    }

    std::optional<Word> double_coset_min_rep(const CosetId& a, const CosetId& b) const override {
        Mat sum = lattices_[a.peripheral];
        for (const Vec& col : lattices_[b.peripheral]) sum.push_back(col);
        sum = hnf(rank_, sum);
        Vec va = abelianize(rank_, a.rep), vb = abelianize(rank_, b.rep);
        Vec diff(rank_);
        for (int r = 0; r < rank_; ++r) diff[r] = vb[r] - va[r];
        Vec res = lattice_residue(rank_, sum, diff);
        long long norm = 0;
        for (long long v : res) norm += v < 0 ? -v : v;
        for (const auto& nf : ball_enumerate(graph_, static_cast<int>(norm))) {
            Vec cand = abelianize(rank_, nf.word);
            Vec d2(rank_);
            for (int r = 0; r < rank_; ++r) d2[r] = cand[r] - res[r];
            if (lattice_member(rank_, sum, d2)) return nf.word;
        }
        return vec_to_word(res);
    }

    bool peripherals_generate() const override {
        Mat all;
        for (const Mat& l : lattices_)
            for (const Vec& col : l) all.push_back(col);
        Mat h = hnf(rank_, all);
        if (static_cast<int>(h.size()) != rank_) return false;
        long long det = 1;
        for (int i = 0; i < rank_; ++i) {
            int row = 0;
            while (row < rank_ && h[i][row] == 0) ++row;
            det *= h[i][row];
        }
        return det == 1 || det == -1;
    }

  private:
    int rank_;
    std::vector<std::string> names_;
    DefiningGraph graph_;
    std::vector<Mat> lattices_;
    std::vector<std::vector<Word>> labels_;
    OracleCapabilities caps_;
};

// ---------------------------------------------------------------------------
// BS(1,k) backend with cyclic peripherals.

class BsOracle final : public PairOracle {
  public:
    BsOracle(int k, std::vector<Word> peripheral_generators, std::vector<std::string> names)
        : k_(k), names_(std::move(names)) {
        if (k_ < 2) throw MalformedError("BS(1,k) needs k >= 2");
        if (names_.empty()) names_ = {"a", "t"};
        for (const Word& u : peripheral_generators) {
            Affine au = affine_of_word(k_, u);
            if (au.is_identity()) throw MalformedError("BS peripheral generator is trivial");
            gens_.push_back(u);
            affines_.push_back(au);
        }
        if (gens_.empty()) throw MalformedError("BS pair needs at least one peripheral");
        caps_.exact_intersection = true;
        caps_.simplex_witnesses = true;
    }

    const OracleCapabilities& capabilities() const override { return caps_; }
    std::string describe() const override { return "BS(1," + std::to_string(k_) + ")"; }
    int alphabet_size() const override { return 2; }
    const std::vector<std::string>& generator_names() const override { return names_; }
    int peripheral_count() const override { return static_cast<int>(gens_.size()); }
    std::string peripheral_label(int p) const override {
        return "<" + format_word(gens_[p], names_) + ">";
    }
    int k() const { return k_; }

    NormalForm normalize(const Word& g) const override {
        Affine target = affine_of_word(k_, g);
        auto found = shortlex_search(static_cast<int>(g.size()),
                                     [&](const Affine& a) { return a == target; });
        if (!found) throw PreconditionError("BS normalize: element escaped its own ball");
        return NormalForm{*found};
    }

    CosetId canonical_coset(int p, const Word& g) const override {
        Affine ag = affine_of_word(k_, g);
        const Affine& u = affines_[p];
        auto found = shortlex_search(static_cast<int>(g.size()), [&](const Affine& a) {
            return power_in_cyclic(k_, u, affine_compose(k_, affine_inverse(k_, a), ag))
                .has_value();
        });
        if (!found) throw PreconditionError("BS coset search: representative escaped the ball");
        CosetId c;
        c.peripheral = p;
        c.rep = *found;
        c.payload = coset_payload(p, ag);
        return c;
    }

    bool infinite_intersection(const std::vector<CosetId>& cosets,
                               Witness* witness) const override {
        auto set = dedupe_cosets(cosets);
        if (set.size() == 1) {
            if (witness)
                witness->element =
                    set[0].rep.concat(gens_[set[0].peripheral]).concat(set[0].rep.inverse_word());
            return true;
        }
        std::vector<Affine> conj;
        bool all_translations = true, all_scalings = true;
        for (const auto& c : set) {
            Affine g = affine_of_word(k_, c.rep);
            Affine cu = affine_compose(k_, affine_compose(k_, g, affines_[c.peripheral]),
                                       affine_inverse(k_, g));
            all_translations = all_translations && cu.scale_exp == 0;
            all_scalings = all_scalings && cu.scale_exp != 0;
            conj.push_back(cu);
        }
        if (all_translations) {
            if (witness) *witness = translation_witness(set, conj);
            return true;
        }
        if (!all_scalings) return false;  // mixed types intersect trivially
        Fraction fp = fixed_point(k_, conj[0]);
        for (std::size_t i = 1; i < conj.size(); ++i)
            if (!(fixed_point(k_, conj[i]) == fp)) return false;
        if (witness) *witness = scaling_witness(set, conj);
        return true;
    }

    bool member_of_conjugate(const CosetId& c, const Word& element) const override {
        Affine g = affine_of_word(k_, c.rep);
        Affine z = affine_compose(
            k_, affine_compose(k_, affine_inverse(k_, g), affine_of_word(k_, element)), g);
        return power_in_cyclic(k_, affines_[c.peripheral], z).has_value();
    }

    std::vector<CosetId> enumerate_cosets(int radius, const EnumOptions& opts) const override {
        std::vector<CosetId> out;
        for (const auto& [affine, word] : ball_elements(radius, opts.cap)) {
            for (int p = 0; p < peripheral_count(); ++p) {
                bool known = false;
                for (const auto& c : out) {
                    if (c.peripheral != p) continue;
                    Affine diff = affine_compose(
                        k_, affine_inverse(k_, affine_of_word(k_, c.rep)), affine);
                    if (power_in_cyclic(k_, affines_[p], diff)) {
                        known = true;
                        break;
                    }
                }
                if (!known) {
                    CosetId c;
                    c.peripheral = p;
                    c.rep = word;
                    c.payload = coset_payload(p, affine);
                    out.push_back(c);
                }
            }
            if (out.size() > opts.cap) throw ResourceLimitError("coset enumeration cap");
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    std::vector<NormalForm> ball(int radius, const EnumOptions& opts) const override {
        std::vector<NormalForm> out;
        for (const auto& [affine, word] : ball_elements(radius, opts.cap))
            out.push_back(NormalForm{word});
        return out;
    }

    std::optional<int> coset_distance(const CosetId& a, const CosetId& b) const override {
        // Bounded search for the shortest ball element of <Ua> h <Ub>.
        Affine h = affine_compose(k_, affine_inverse(k_, affine_of_word(k_, a.rep)),
                                  affine_of_word(k_, b.rep));
        const Affine& ua = affines_[a.peripheral];
        const Affine& ub = affines_[b.peripheral];
        int bound = static_cast<int>(a.rep.size() + b.rep.size()) + 4;
        for (const auto& [affine, word] : ball_elements(bound, 500'000)) {
            for (long long i = -bound; i <= bound; ++i) {
                // affine == ua^i h ub^j for some j?
                Affine rest = affine_compose(
                    k_, affine_inverse(k_, affine_compose(k_, affine_pow(k_, ua, i), h)), affine);
                if (power_in_cyclic(k_, ub, rest)) return static_cast<int>(word.size());
            }
        }
        return std::nullopt;  // bounded search inconclusive
    }

    bool peripherals_generate() const override {
        // Bounded closure: do products of peripheral generators reach a and t?
        std::set<std::tuple<int, long long, long long>> seen;
        auto key = [](const Affine& x) {
            return std::make_tuple(x.scale_exp, x.offset.num, x.offset.den);
        };
        std::vector<Affine> frontier{Affine{}};
        seen.insert(key(Affine{}));
        Affine a0 = affine_of_letter(k_, make_letter(0, +1));
        Affine t0 = affine_of_letter(k_, make_letter(1, +1));
        bool has_a = false, has_t = false;
        for (int depth = 0; depth < 6 && !(has_a && has_t); ++depth) {
            std::vector<Affine> next;
            for (const Affine& cur : frontier)
                for (const Word& u : gens_)
                    for (const Word& w : {u, u.inverse_word()}) {
                        Affine cand = affine_compose(k_, cur, affine_of_word(k_, w));
                        if (seen.insert(key(cand)).second) next.push_back(cand);
                        has_a = has_a || cand == a0;
                        has_t = has_t || cand == t0;
                    }
            frontier = std::move(next);
        }
        return has_a && has_t;
    }

  private:
    std::string coset_payload(int p, const Affine& g) const {
        const Affine& u = affines_[p];
        if (u.scale_exp == 0) {
            Fraction s = u.offset.times(pow_frac(k_, g.scale_exp));
            return "translation:" + s.str();
        }
        Fraction p0 = fixed_point(k_, u);
        Fraction moved = p0.times(pow_frac(k_, g.scale_exp)).plus(g.offset);
        return "fix:" + moved.str();
    }

    // Elements of the ball with their shortlex-least words, in shortlex order.
    std::vector<std::pair<Affine, Word>> ball_elements(int radius, std::size_t cap) const {
        std::vector<std::pair<Affine, Word>> all{{Affine{}, Word{}}};
        std::vector<std::pair<Affine, Word>> layer = all;
        std::set<std::tuple<int, long long, long long>> seen;
        auto key = [](const Affine& x) {
            return std::make_tuple(x.scale_exp, x.offset.num, x.offset.den);
        };
        seen.insert(key(Affine{}));
        for (int r = 1; r <= radius; ++r) {
            std::vector<std::pair<Affine, Word>> next;
            for (const auto& [aff, word] : layer)
                for (int rank_i = 0; rank_i < 4; ++rank_i) {
                    Letter l = make_letter(rank_i / 2, (rank_i % 2) ? -1 : +1);
                    Affine cand = affine_compose(k_, aff, affine_of_letter(k_, l));
                    if (seen.count(key(cand))) continue;
                    Word w2 = word;
                    w2.letters.push_back(l);
                    next.push_back({cand, w2});
                }
            std::sort(next.begin(), next.end(), [](const auto& a, const auto& b) {
                return shortlex_less(a.second, b.second);
            });
            std::vector<std::pair<Affine, Word>> uniq;
            for (auto& item : next)
                if (seen.insert(key(item.first)).second) uniq.push_back(std::move(item));
            if (all.size() + uniq.size() > cap) throw ResourceLimitError("BS ball cap");
            all.insert(all.end(), uniq.begin(), uniq.end());
            layer = std::move(uniq);
            if (layer.empty()) break;
        }
        return all;
    }

    template <typename Pred>
    std::optional<Word> shortlex_search(int radius, Pred&& pred) const {
        for (const auto& [aff, word] : ball_elements(radius, 2'000'000))
            if (pred(aff)) return word;
        return std::nullopt;
    }

    Witness translation_witness(const std::vector<CosetId>& set,
                                const std::vector<Affine>& conj) const {
        // Scale the first conjugate generator until its translation length is
        // a multiple of every other one.
        Fraction s0 = conj[0].offset;
        long long mult = 1;
        for (const Affine& c : conj) {
            Fraction ratio =
                s0.times(Fraction::of(mult)).times(Fraction::of(c.offset.den, c.offset.num));
            if (ratio.den != 1) mult *= ratio.den;
        }
        Witness w;
        Word power;
        for (long long i = 0; i < mult; ++i) power = power.concat(gens_[set[0].peripheral]);
        w.element = set[0].rep.concat(power).concat(set[0].rep.inverse_word());
        w.note = "common translation";
        return w;
    }

    Witness scaling_witness(const std::vector<CosetId>& set,
                            const std::vector<Affine>& conj) const {
        long long l = 1;
        for (const Affine& c : conj) {
            long long m = c.scale_exp < 0 ? -c.scale_exp : c.scale_exp;
            l = l / gcd_ll(l, m) * m;
        }
        long long j = l / conj[0].scale_exp;
        if (j < 0) j = -j;
        Witness w;
        Word power;
        for (long long i = 0; i < j; ++i) power = power.concat(gens_[set[0].peripheral]);
        w.element = set[0].rep.concat(power).concat(set[0].rep.inverse_word());
        w.note = "common fixed point";
        return w;
    }

    int k_;
    std::vector<std::string> names_;
    std::vector<Word> gens_;
    std::vector<Affine> affines_;
    OracleCapabilities caps_;
};

// ---------------------------------------------------------------------------
// Direct product backend.

class ProductOracle final : public PairOracle {
  public:
    ProductOracle(std::unique_ptr<PairOracle> left, std::unique_ptr<PairOracle> right,
                  std::vector<std::pair<int, int>> pairs)
        : left_(std::move(left)), right_(std::move(right)), pairs_(std::move(pairs)) {
        if (pairs_.empty()) throw MalformedError("product pair needs at least one peripheral");
        for (auto [l, r] : pairs_)
            if (l < 0 || l >= left_->peripheral_count() || r < 0 ||
                r >= right_->peripheral_count())
                throw MalformedError("product peripheral index out of range");
        if (!left_->capabilities().exact_intersection ||
            !right_->capabilities().exact_intersection)
            throw CapabilityError("product oracle needs exact factors");
        caps_.exact_intersection = true;
        caps_.exact_coset_distance = left_->capabilities().exact_coset_distance &&
                                     right_->capabilities().exact_coset_distance;
        caps_.simplex_witnesses = left_->capabilities().simplex_witnesses &&
                                  right_->capabilities().simplex_witnesses;
        caps_.higher_simplices =
            left_->capabilities().higher_simplices && right_->capabilities().higher_simplices;
        for (const auto& n : left_->generator_names()) names_.push_back(n + ".L");
        for (const auto& n : right_->generator_names()) names_.push_back(n + ".R");
    }

    const OracleCapabilities& capabilities() const override { return caps_; }
    std::string describe() const override {
        return "(" + left_->describe() + ") x (" + right_->describe() + ")";
    }
    int alphabet_size() const override { return left_->alphabet_size() + right_->alphabet_size(); }
    const std::vector<std::string>& generator_names() const override { return names_; }
    int peripheral_count() const override { return static_cast<int>(pairs_.size()); }
    std::string peripheral_label(int p) const override {
        return left_->peripheral_label(pairs_[p].first) + " x " +
               right_->peripheral_label(pairs_[p].second);
    }

    NormalForm normalize(const Word& g) const override {
        auto [l, r] = split(g);
        return NormalForm{combine(left_->normalize(l).word, right_->normalize(r).word)};
    }

    CosetId canonical_coset(int p, const Word& g) const override {
        auto [l, r] = split(g);
        CosetId cl = left_->canonical_coset(pairs_[p].first, l);
        CosetId cr = right_->canonical_coset(pairs_[p].second, r);
        CosetId out;
        out.peripheral = p;
        out.rep = combine(cl.rep, cr.rep);
        out.payload = cl.payload + "|" + cr.payload;
        return out;
    }

    bool infinite_intersection(const std::vector<CosetId>& cosets,
                               Witness* witness) const override {
        auto set = dedupe_cosets(cosets);
        std::vector<CosetId> ls, rs;
        for (const auto& c : set) {
            auto [l, r] = split(c.rep);
            ls.push_back(left_->canonical_coset(pairs_[c.peripheral].first, l));
            rs.push_back(right_->canonical_coset(pairs_[c.peripheral].second, r));
        }
        Witness wl, wr;
        if (left_->infinite_intersection(ls, &wl)) {
            if (witness) witness->element = combine(wl.element, Word{});
            return true;
        }
        if (right_->infinite_intersection(rs, &wr)) {
            if (witness) witness->element = combine(Word{}, wr.element);
            return true;
        }
        return false;
    }

    bool member_of_conjugate(const CosetId& c, const Word& element) const override {
        auto [l, r] = split(c.rep);
        auto [el, er] = split(element);
        CosetId cl = left_->canonical_coset(pairs_[c.peripheral].first, l);
        CosetId cr = right_->canonical_coset(pairs_[c.peripheral].second, r);
        return left_->member_of_conjugate(cl, el) && right_->member_of_conjugate(cr, er);
    }

    std::vector<CosetId> enumerate_cosets(int radius, const EnumOptions& opts) const override {
        std::set<CosetId> out;
        auto lc = left_->enumerate_cosets(radius, opts);
        auto rc = right_->enumerate_cosets(radius, opts);
        for (int p = 0; p < peripheral_count(); ++p)
            for (const auto& cl : lc) {
                if (cl.peripheral != pairs_[p].first) continue;
                for (const auto& cr : rc) {
                    if (cr.peripheral != pairs_[p].second) continue;
                    if (cl.rep.size() + cr.rep.size() > static_cast<std::size_t>(radius)) continue;
                    CosetId c;
                    c.peripheral = p;
                    c.rep = combine(cl.rep, cr.rep);
                    c.payload = cl.payload + "|" + cr.payload;
                    out.insert(c);
                    if (out.size() > opts.cap) throw ResourceLimitError("coset enumeration cap");
                }
            }
        return {out.begin(), out.end()};
    }

    std::vector<NormalForm> ball(int radius, const EnumOptions& opts) const override {
        auto lb = left_->ball(radius, opts);
        auto rb = right_->ball(radius, opts);
        std::vector<NormalForm> out;
        for (const auto& l : lb)
            for (const auto& r : rb) {
                if (l.length() + r.length() > static_cast<std::size_t>(radius)) continue;
                out.push_back(NormalForm{combine(l.word, r.word)});
                if (out.size() > opts.cap) throw ResourceLimitError("ball cap");
            }
        std::sort(out.begin(), out.end(), [](const NormalForm& a, const NormalForm& b) {
            return shortlex_less(a.word, b.word);
        });
        return out;
    }

    std::optional<int> coset_distance(const CosetId& a, const CosetId& b) const override {
        auto [la, ra] = split(a.rep);
        auto [lb, rb] = split(b.rep);
        auto dl = left_->coset_distance(left_->canonical_coset(pairs_[a.peripheral].first, la),
                                        left_->canonical_coset(pairs_[b.peripheral].first, lb));
        auto dr = right_->coset_distance(right_->canonical_coset(pairs_[a.peripheral].second, ra),
                                         right_->canonical_coset(pairs_[b.peripheral].second, rb));
        if (!dl || !dr) return std::nullopt;
        return *dl + *dr;
    }

    std::optional<Word> double_coset_min_rep(const CosetId& a, const CosetId& b) const override {
        auto [la, ra] = split(a.rep);
        auto [lb, rb] = split(b.rep);
        auto dl = left_->double_coset_min_rep(
            left_->canonical_coset(pairs_[a.peripheral].first, la),
            left_->canonical_coset(pairs_[b.peripheral].first, lb));
        auto dr = right_->double_coset_min_rep(
            right_->canonical_coset(pairs_[a.peripheral].second, ra),
            right_->canonical_coset(pairs_[b.peripheral].second, rb));
        if (!dl || !dr) return std::nullopt;
        return combine(*dl, *dr);
    }

    bool peripherals_generate() const override {
        return left_->peripherals_generate() && right_->peripherals_generate();
    }

  private:
    std::pair<Word, Word> split(const Word& w) const {
        Word l, r;
        int n = left_->alphabet_size();
        for (Letter x : w.letters) {
            if (gen_of(x) < n)
                l.letters.push_back(x);
            else
                r.letters.push_back(make_letter(gen_of(x) - n, sign_of(x)));
        }
        return {l, r};
    }

    Word combine(const Word& l, const Word& r) const {
        Word out = l;
        int n = left_->alphabet_size();
        for (Letter x : r.letters) out.letters.push_back(make_letter(gen_of(x) + n, sign_of(x)));
        return out;
    }

    std::unique_ptr<PairOracle> left_, right_;
    std::vector<std::pair<int, int>> pairs_;
    std::vector<std::string> names_;
    OracleCapabilities caps_;
};

}  // namespace

std::unique_ptr<PairOracle> make_oracle(const GroupPairSpec& spec) {
    switch (spec.kind) {
        case GroupPairSpec::Kind::Free:
            return std::make_unique<FreeOracle>(spec.rank, spec.peripherals, spec.names);
        case GroupPairSpec::Kind::Lattice:
            return std::make_unique<LatticeOracle>(spec.rank, spec.peripherals, spec.names);
        case GroupPairSpec::Kind::BS: {
            std::vector<Word> gens;
            for (const auto& words : spec.peripherals) {
                if (words.size() != 1)
                    throw MalformedError("BS peripherals must be cyclic (one generator word)");
                gens.push_back(words.front());
            }
            return std::make_unique<BsOracle>(spec.bs_k, gens, spec.names);
        }
        case GroupPairSpec::Kind::Raag: {
            if (spec.raag_stars) return std::make_unique<RaagStarOracle>(spec.graph, spec.names);
            std::vector<std::pair<int, int>> pairs;
            if (spec.raag_maximal_abelians) {
                for (int a = 0; a < spec.graph.size(); ++a)
                    for (int b = a + 1; b < spec.graph.size(); ++b)
                        if (spec.graph.adjacent(a, b)) pairs.push_back({a, b});
            } else {
                for (const auto& words : spec.peripherals) {
                    std::uint64_t m = 0;
                    for (const Word& w : words)
                        for (Letter l : w.letters) m |= std::uint64_t{1} << gen_of(l);
                    std::vector<int> gens;
                    for (int v = 0; v < spec.graph.size(); ++v)
                        if ((m >> v) & 1) gens.push_back(v);
                    if (gens.size() != 2)
                        throw MalformedError(
                            "RAAG peripherals must be standard abelian pairs of generators");
                    pairs.push_back({gens[0], gens[1]});
                }
            }
            return std::make_unique<RaagAbelianOracle>(spec.graph, pairs, spec.names);
        }
        case GroupPairSpec::Kind::Product: {
            if (!spec.left || !spec.right)
                throw MalformedError("product spec needs two factor specs");
            return std::make_unique<ProductOracle>(make_oracle(*spec.left),
                                                   make_oracle(*spec.right), spec.product_pairs);
        }
    }
    throw MalformedError("unknown group pair kind");
}

}  // namespace cosetc
