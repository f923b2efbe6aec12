#pragma once

// A uniform group-pair interface with exact backends: free-group pairs,
// triangle-free RAAG maximal-abelian pairs (and their star subgroups),
// free-abelian lattice pairs, BS(1,k) with cyclic peripherals, and direct
// products.  Oracles are immutable after construction and all queries are
// pure.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cosetc/rational.hpp"
#include "cosetc/stallings.hpp"
#include "cosetc/words.hpp"

namespace cosetc {

struct OracleCapabilities {
    bool exact_intersection = false;
    bool exact_coset_distance = false;
    bool ktau_supported = false;
    bool simplex_witnesses = false;
    bool higher_simplices = true;  // k >= 3 intersection queries supported
};

// Canonical left coset g P: peripheral index plus the minimal-length,
// shortlex-least representative.  Two ids are equal iff the cosets are.
struct CosetId {
    int peripheral = 0;
    Word rep;
    std::string payload;  // oracle-specific invariant, informational

    bool operator==(const CosetId& o) const {
        return peripheral == o.peripheral && rep == o.rep;
    }
    bool operator!=(const CosetId& o) const { return !(*this == o); }
    bool operator<(const CosetId& o) const {
        if (rep != o.rep) return shortlex_less(rep, o.rep);
        return peripheral < o.peripheral;
    }
};

struct Witness {
    Word element;
    std::string note;
};

struct EnumOptions {
    std::size_t cap = 100'000;
};

class PairOracle {
  public:
    virtual ~PairOracle() = default;

    virtual const OracleCapabilities& capabilities() const = 0;
    virtual std::string describe() const = 0;
    virtual int alphabet_size() const = 0;
    virtual const std::vector<std::string>& generator_names() const = 0;
    virtual int peripheral_count() const = 0;
    virtual std::string peripheral_label(int p) const = 0;

    virtual NormalForm normalize(const Word& g) const = 0;
    virtual CosetId canonical_coset(int p, const Word& g) const = 0;

    // Exact verdict on whether the conjugates of the (deduplicated) cosets
    // intersect in an infinite subgroup; fills the witness where supported.
    virtual bool infinite_intersection(const std::vector<CosetId>& cosets,
                                       Witness* witness = nullptr) const = 0;

    // Independent verification path: does `element` lie in rep P rep^-1 ?
    virtual bool member_of_conjugate(const CosetId& c, const Word& element) const = 0;

    virtual std::vector<CosetId> enumerate_cosets(int radius, const EnumOptions& opts = {}) const = 0;
    virtual std::vector<NormalForm> ball(int radius, const EnumOptions& opts = {}) const = 0;

    // Infimum distance between the cosets in the word metric; nullopt when the
    // backend's bounded search is inconclusive (exact backends never return
    // nullopt).
    virtual std::optional<int> coset_distance(const CosetId& a, const CosetId& b) const = 0;

    CosetId translate(const Word& g, const CosetId& c) const {
        return canonical_coset(c.peripheral, g.concat(c.rep));
    }

    // Do the peripheral subgroups generate the whole group?
    virtual bool peripherals_generate() const = 0;

    // Canonical (shortlex-least minimal-length) element of the double coset
    // P_a (rep_a^-1 rep_b) P_b, the orbit invariant of translated coset pairs.
    // nullopt when only a bounded search is available and it is inconclusive.
    virtual std::optional<Word> double_coset_min_rep(const CosetId& a, const CosetId& b) const {
        (void)a;
        (void)b;
        return std::nullopt;
    }

    // K_tau simplex test; only free-group backends support it.
    virtual bool ktau_simplex(const std::vector<CosetId>& cosets, int tau) const {
        (void)cosets;
        (void)tau;
        throw CapabilityError("K_tau is unsupported for " + describe());
    }
};

// ---------------------------------------------------------------------------
// Group-pair specification (parsed from config files or built in code).

struct GroupPairSpec {
    enum class Kind { Free, Raag, Lattice, BS, Product };
    Kind kind = Kind::Free;

    int rank = 0;  // free rank or lattice rank
    DefiningGraph graph;
    int bs_k = 2;
    std::vector<std::string> names;

    // Peripherals as lists of generator words; for RAAGs the keywords below
    // expand instead.
    std::vector<std::vector<Word>> peripherals;
    bool raag_maximal_abelians = false;
    bool raag_stars = false;

    std::shared_ptr<GroupPairSpec> left, right;
    std::vector<std::pair<int, int>> product_pairs;  // (left peripheral, right peripheral)
};

std::unique_ptr<PairOracle> make_oracle(const GroupPairSpec& spec);

// ---------------------------------------------------------------------------
// RAAG criteria (exported for direct testing and the qilab module).

struct RaagEdgeVerdict {
    bool edge = false;
    int witness_generator = -1;
    Word witness_element;
};

// Edge test for cosets g1<a1,b1>, g2<a2,b2> of maximal standard abelians in a
// triangle-free graph of minimal valence >= 2: there is an edge iff some
// shared generator v has supp(nf(g1^-1 g2)) inside Star(v).
RaagEdgeVerdict raag_edge_criterion(const DefiningGraph& graph, std::pair<int, int> p1,
                                    const Word& g1, std::pair<int, int> p2, const Word& g2);

// Simplex test: one generator v lies in every pair with all nf(g1^-1 gi)
// supported in Star(v).
struct RaagSimplexVerdict {
    bool simplex = false;
    int witness_generator = -1;
    Word witness_element;
};
RaagSimplexVerdict raag_simplex_test(const DefiningGraph& graph,
                                     const std::vector<std::pair<std::pair<int, int>, Word>>& cosets);

// Edge test between star cosets g1<Star(a)>, g2<Star(b)>: an edge exists iff
// nf(g1^-1 g2) factors as <Star(a)> <Star(x)> <Star(b)> for some
// x in Star(a) cap Star(b).  On success the factors are returned; they drive
// the explicit coned-off paths.
struct StarEdgeVerdict {
    bool edge = false;
    int witness_generator = -1;
    NormalForm alpha, middle, beta;  // g1^-1 g2 = alpha * middle * beta
};
StarEdgeVerdict raag_star_edge(const DefiningGraph& graph, int a, const Word& g1, int b,
                               const Word& g2);

// ---------------------------------------------------------------------------
// Exact affine arithmetic for BS(1,k) = < a, t | t a t^-1 = a^k >, with
// a: x -> x+1 and t: x -> kx.  A word maps to the composition with its first
// letter outermost.

struct Fraction {
    long long num = 0;
    long long den = 1;

    static Fraction of(long long n, long long d = 1);
    Fraction plus(const Fraction& o) const;
    Fraction times(const Fraction& o) const;
    bool operator==(const Fraction& o) const { return num == o.num && den == o.den; }
    std::string str() const;
};

struct Affine {
    int scale_exp = 0;  // multiplier k^scale_exp
    Fraction offset;    // x -> k^scale_exp * x + offset

    bool operator==(const Affine& o) const {
        return scale_exp == o.scale_exp && offset == o.offset;
    }
    bool operator<(const Affine& o) const;
    bool is_identity() const { return scale_exp == 0 && offset == Fraction::of(0); }
};

Affine affine_of_letter(int k, Letter l);
Affine affine_compose(int k, const Affine& outer, const Affine& inner);
Affine affine_of_word(int k, const Word& w);
Affine affine_inverse(int k, const Affine& a);

}  // namespace cosetc
