// Copyright 2026 The emq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emq/circuit.hpp"
#include "emq/exact.hpp"
#include "emq/group.hpp"
#include "emq/oracle.hpp"
#include "json.hpp"

namespace emq {

class Rng;

/// A finite map x -> (y_0, ..., y_{D-1}) over Z_p^n.
class PartialFunction {
public:
    PartialFunction(Ambient ambient, std::uint64_t D);

    const Ambient& ambient() const { return ambient_; }
    std::uint64_t arity() const { return D_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    bool contains(Code x) const { return entries_.count(x) != 0; }
    const std::vector<Code>& at(Code x) const { return entries_.at(x); }
    const std::map<Code, std::vector<Code>>& entries() const { return entries_; }

    /// Throws std::invalid_argument on wrong arity or out-of-range codes.
    void set(Code x, std::vector<Code> tuple);
    void erase(Code x) { entries_.erase(x); }

    /// The restriction of O to the given domain.
    static PartialFunction restrict(const OracleSequence& o, const std::vector<Code>& domain);

    std::string to_string() const;
    friend bool operator==(const PartialFunction&, const PartialFunction&) = default;

private:
    Ambient ambient_;
    std::uint64_t D_;
    std::map<Code, std::vector<Code>> entries_;
};

/// O(x) = s(x) tuple-wise on dom(s).
bool extends(const OracleSequence& o, const PartialFunction& s);

/// Exact Pr_{O in F_D*}[O extends s], D = arity of s, by enumeration.
Rational q_s_enumerated(const PartialFunction& s);

/// Domain of s partitioned by the sigma relation after the translation
/// rewrite that moves every non-anchor point of classes 2..w into class 1.
struct DomainStructure {
    Ambient ambient;
    std::uint64_t D = 1;
    PartialFunction normalized{Ambient{2, 0}, 1};
    std::vector<std::vector<Code>> classes;  // classes[0] holds 0^n; each class sorted
    std::vector<std::size_t> sizes;          // v_1, ..., v_w
    std::vector<Code> anchors;               // a^{1,1} = 0, a^{2,1}, ..., a^{w,1}
    Subgroup k_prime = Subgroup::trivial(Ambient{2, 0});  // <A^1>
    std::uint32_t d_prime = 0;
    std::uint32_t w_prime = 0;  // anchors that are minimal in their K'-coset
    bool has_zero = false;
    /// Set when no sequence in F_D* can extend s; `reason` says why.
    bool inconsistent = false;
    std::string reason;

    std::size_t v1() const { return sizes.empty() ? 0 : sizes[0]; }
    std::size_t w() const { return classes.size(); }
    std::uint64_t D_prime() const { return checked_pow(ambient.p, d_prime); }
    /// Anchors mapped into Z_p^n / K' = Z_p^(n - d').
    std::vector<GroupVector> quotient_anchors() const;
};

/// Requires 0^n in dom(s); throws std::invalid_argument otherwise.
DomainStructure domain_structure(const PartialFunction& s);

/// beta_p(n-d', d-d') / beta_p(n, d); 0 when D < D'.
Rational q_s_R(const DomainStructure& st, std::uint64_t D);
Rational q_s_R(std::uint32_t p, std::uint32_t n, std::uint32_t d_prime, std::uint64_t D);
/// prod_{i<d'} (D/p^i - 1)/(p^(n-i) - 1) for any rational D.
Rational q_s_R_poly(std::uint32_t p, std::uint32_t n, std::uint32_t d_prime, const Rational& D);

/// 1 / (p^n (p^n - 1) ... (p^n - w' + 1)).
Rational nu_t(std::uint32_t w_prime, std::uint32_t p, std::uint32_t n);

/// Pr over uniform order-E subgroups H of Z_p^(n_q) that all anchors lie in
/// distinct cosets of H, by inclusion-exclusion over sets of pairwise
/// differences.
Rational lambda_t(const std::vector<GroupVector>& anchors, std::uint32_t p, std::uint32_t n_q, std::uint64_t E);
/// The same inclusion-exclusion with each term written as its polynomial in
/// E, so any rational E is accepted.
Rational lambda_t_poly(const std::vector<GroupVector>& anchors, std::uint32_t p, std::uint32_t n_q, const Rational& E);

struct FactoredQ {
    Rational q_r;
    Rational nu;
    Rational lambda;
    Rational value;  // q_r * nu * lambda (or the 0^n-insertion sum)
};

/// Closed-form product for s viewed at hidden order D. The structure is
/// taken from s itself; D may differ from the arity of s.
FactoredQ q_s_factored_parts(const DomainStructure& st, std::uint64_t D);
/// Factored value for s at its own arity. When 0^n is not in dom(s) the
/// value is the sum over admissible O(0^n) tuples.
Rational q_s_factored(const PartialFunction& s);

/// Pr that a uniform permutation of Z_p^n extends each padding map.
Rational pad_extension_fraction(std::uint32_t p, std::uint32_t n, const std::vector<std::map<Code, Code>>& pads);

struct FitPoint {
    double x = 0;
    double y = 0;
    std::optional<Rational> exact_x;
    std::optional<Rational> exact_y;
};

struct RationalPolynomialFit {
    std::vector<FitPoint> points;
    std::size_t degree = 0;
    std::vector<double> coefficients;                      // monomial, constant first
    std::optional<std::vector<Rational>> exact_coefficients;
    double residual = 0;        // max |fit - y| at the chosen degree
    double lower_residual = 0;  // same for the least-squares fit one degree lower; NaN at degree 0
    double tolerance = 0;
    bool exact = false;

    double evaluate(double x) const;
};

/// Smallest degree whose fit reproduces every point: exactly when all points
/// are rational, within `tolerance` otherwise. Needs >= 2 distinct abscissae.
RationalPolynomialFit fit_degree(const std::vector<FitPoint>& points, double tolerance = 1e-6);
RationalPolynomialFit fit_degree_exact(const std::vector<std::pair<Rational, Rational>>& points);
RationalPolynomialFit fit_degree_float(const std::vector<std::pair<double, double>>& points, double tolerance = 1e-6);

/// Value at x of the interpolant through the points.
Rational lagrange_predict(const std::vector<std::pair<Rational, Rational>>& points, const Rational& x);
double lagrange_predict(const std::vector<std::pair<double, double>>& points, double x);

/// min{n/2, (log2(xi^(n+3) c) - 1) / (log2(xi^3/(xi-1)) + 1)}, floored at 0.
double koiran_degree_bound(double xi, double c, double n);
/// The instance xi = p, c = (2 - 4 eps)/(p - 1). eps in (0, 1/2]; eps = 1/2 gives 0.
double koiran_bound(std::uint32_t p, double n, double epsilon);

enum class PadMode { kAuto, kAnalytic, kNested, kSampled };

struct QOfDOptions {
    PadMode pad_mode = PadMode::kAuto;
    bool allow_sampling = true;
    std::uint64_t samples = 20000;
    std::uint64_t seed = 1;
    std::uint64_t nested_cap = 2'000'000;  // core x pad evaluations for nested enumeration
};

struct QOfDResult {
    double value = 0;
    double std_error = 0;
    bool exact = false;
    std::string method;
    std::uint64_t evaluations = 0;
};

/// Mean acceptance probability of a synchronized algorithm with N answer
/// blocks over sequences whose first D blocks are a uniform member of F_D*
/// and whose remaining blocks are independent uniform permutations.
QOfDResult q_of_d_enumerated(const QueryAlgorithm& alg, std::uint32_t p, std::uint32_t n, std::uint64_t D,
                             std::uint32_t N, const QOfDOptions& opts = {});

/// A reproducible corpus of partial functions, one per entry and D. Each
/// entry is a domain containing 0^n; at each D the values are read off a
/// seeded random member of F_D*.
struct CorpusEntry {
    std::vector<Code> domain;
    std::map<std::uint64_t, PartialFunction> by_D;
};
std::vector<CorpusEntry> make_corpus(std::uint32_t p, std::uint32_t n, std::size_t count,
                                     const std::vector<std::uint64_t>& Ds, std::uint64_t seed);

/// Degrees of the closed-form factors of one structure, sampled over the
/// corpus D values.
struct StructureFit {
    std::uint64_t source_D = 1;  // arity of the partial function the structure came from
    std::size_t dom = 0;
    std::size_t v1 = 0;
    std::size_t w = 0;
    std::uint32_t d_prime = 0;
    std::uint32_t w_prime = 0;
    bool inconsistent = false;
    RationalPolynomialFit fit_q;
    RationalPolynomialFit fit_q_r;
    RationalPolynomialFit fit_q_c;
    bool bound_q_r = false;  // deg Q^R <= v_1 - 1
    bool bound_q_c = false;  // deg Q^C <= w
    bool bound_q = false;    // deg Q <= |dom|
    bool ok() const { return bound_q_r && bound_q_c && bound_q; }
};

/// Degree ledger for one corpus entry.
struct DegreeRecord {
    std::vector<Code> domain;
    std::map<std::uint64_t, Rational> enumerated;
    std::map<std::uint64_t, FactoredQ> factored;
    std::map<std::uint64_t, bool> equal;
    std::vector<StructureFit> fits;
    /// Degree of the enumerated values across D. Each D has its own partial
    /// function, so this is reported but not part of bounds_ok().
    RationalPolynomialFit fit_enumerated;
    bool bound_enumerated = false;

    bool all_equal() const;
    /// Every structure fit within its degree bounds.
    bool bounds_ok() const;
};
DegreeRecord degree_record(const CorpusEntry& e);

nlohmann::json to_json(const DomainStructure& st);
nlohmann::json to_json(const RationalPolynomialFit& f);
nlohmann::json to_json(const DegreeRecord& r);

}  // namespace emq
