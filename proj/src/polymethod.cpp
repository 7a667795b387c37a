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

#include "emq/polymethod.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <functional>
#include <iterator>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Dense>

#include "emq/rng.hpp"
#include "emq/simulator.hpp"
#include "emq/statevector.hpp"

namespace emq {

namespace {


std::string tuple_string(const Ambient& a, const std::vector<Code>& t) {
    std::string out = "(";
    for (std::size_t j = 0; j < t.size(); ++j) {
        if (j) out += ",";
        out += GroupVector::from_code(a, t[j]).to_string();
    }
    return out + ")";
}

// The l with t2 = sigma_l t1, if any.
std::optional<std::uint64_t> sigma_relation(const std::vector<Code>& t1, const std::vector<Code>& t2,
                                            const std::vector<std::vector<std::uint64_t>>& sigmas) {
    for (std::uint64_t l = 0; l < sigmas.size(); ++l) {
        bool ok = true;
        for (std::size_t j = 0; j < t1.size() && ok; ++j) ok = t2[j] == t1[sigmas[l][j]];
        if (ok) return l;
    }
    return std::nullopt;
}

std::vector<std::vector<std::uint64_t>> all_sigmas(std::uint32_t p, std::uint64_t D) {
    const std::uint32_t d = log_p_exact(p, D);
    std::vector<std::vector<std::uint64_t>> out;
    for (std::uint64_t l = 0; l < D; ++l) out.push_back(sigma_perm(p, d, l));
    return out;
}

Rational pow_rational(std::uint32_t p, std::uint32_t k) { return Rational(BigInt(checked_pow(p, k))); }

// Pr that a fixed rank-e' subspace lies in a uniform subgroup of order E of
// Z_p^(n_q), as a polynomial in E.
Rational containment_poly(std::uint32_t p, std::uint32_t n_q, std::uint32_t e_prime, const Rational& E) {
    Rational r = 1;
    for (std::uint32_t i = 0; i < e_prime; ++i) {
        if (i >= n_q) return 0;
        r *= (E / pow_rational(p, i) - 1) / (pow_rational(p, n_q - i) - 1);
    }
    return r;
}

double max_abs_residual(const Eigen::VectorXd& coef, const std::vector<std::pair<double, double>>& pts) {
    double worst = 0;
    for (const auto& [x, y] : pts) {
        double v = 0, xp = 1;
        for (Eigen::Index k = 0; k < coef.size(); ++k) {
            v += coef(k) * xp;
            xp *= x;
        }
        worst = std::max(worst, std::abs(v - y));
    }
    return worst;
}

Eigen::VectorXd least_squares(const std::vector<std::pair<double, double>>& pts, std::size_t degree) {
    Eigen::MatrixXd V(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(degree + 1));
    Eigen::VectorXd y(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t r = 0; r < pts.size(); ++r) {
        double xp = 1;
        for (std::size_t k = 0; k <= degree; ++k) {
            V(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = xp;
            xp *= pts[r].first;
        }
        y(static_cast<Eigen::Index>(r)) = pts[r].second;
    }
    return V.colPivHouseholderQr().solve(y);
}

void require_fit_points(std::size_t count, const std::vector<double>& xs) {
    if (count < 2) throw std::invalid_argument("fit_degree needs at least two points");
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("fit_degree needs distinct abscissae");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Partial functions

PartialFunction::PartialFunction(Ambient ambient, std::uint64_t D) : ambient_(ambient), D_(D) {
    if (D == 0) throw std::invalid_argument("arity must be positive");
}

void PartialFunction::set(Code x, std::vector<Code> tuple) {
    const std::uint64_t size = ambient_.size();
    if (tuple.size() != D_) throw std::invalid_argument("tuple arity does not match D");
    if (x >= size) throw std::invalid_argument("domain point out of range");
    for (auto y : tuple) {
        if (y >= size) throw std::invalid_argument("tuple value out of range");
    }
    entries_[x] = std::move(tuple);
}

PartialFunction PartialFunction::restrict(const OracleSequence& o, const std::vector<Code>& domain) {
    PartialFunction s(o.ambient(), o.size());
    for (auto x : domain) s.set(x, o.tuple_at(x));
    return s;
}

std::string PartialFunction::to_string() const {
    std::string out = "{";
    bool first = true;
    for (const auto& [x, t] : entries_) {
        if (!first) out += ", ";
        first = false;
        out += GroupVector::from_code(ambient_, x).to_string() + "->" + tuple_string(ambient_, t);
    }
    return out + "}";
}

bool extends(const OracleSequence& o, const PartialFunction& s) {
    if (o.ambient() != s.ambient() || o.size() != s.arity()) {
        throw std::invalid_argument("extends: ambient or arity mismatch");
    }
    for (const auto& [x, t] : s.entries()) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (o[i](x) != t[i]) return false;
        }
    }
    return true;
}

Rational q_s_enumerated(const PartialFunction& s) {
    const Ambient& a = s.ambient();
    if (s.empty()) return 1;
    const std::uint64_t D = s.arity();
    const BigInt total = F_D_star_count(a.p, a.n, D);
    if (total > kEnumerationCap) throw std::length_error("F_D* enumeration cap exceeded");
    const DigitArithmetic arith(a);
    BigInt hits = 0;
    for (const Subgroup& k : enumerate_subgroups(a.p, a.n, log_p_exact(a.p, D))) {
        const auto ks = k.element_codes();
        PiKEnumerator it(k);
        while (auto o0 = it.next()) {
            bool ok = true;
            for (const auto& [x, t] : s.entries()) {
                for (std::size_t i = 0; i < D && ok; ++i) ok = (*o0)(arith.add(x, ks[i])) == t[i];
                if (!ok) break;
            }
            if (ok) ++hits;
        }
    }
    return Rational(hits) / Rational(total);
}

// ---------------------------------------------------------------------------
// Domain structure

std::vector<GroupVector> DomainStructure::quotient_anchors() const {
    std::vector<GroupVector> out;
    for (auto a : anchors) out.push_back(k_prime.quotient_coordinates(GroupVector::from_code(ambient, a)));
    return out;
}

DomainStructure domain_structure(const PartialFunction& s) {
    const Ambient a = s.ambient();
    const std::uint64_t D = s.arity();
    if (!s.contains(0)) throw std::invalid_argument("domain_structure requires 0^n in dom(s)");
    const auto sigmas = all_sigmas(a.p, D);
    const DigitArithmetic arith(a);

    DomainStructure st;
    st.ambient = a;
    st.D = D;
    st.has_zero = true;
    st.normalized = PartialFunction(a, D);
    st.k_prime = Subgroup::trivial(a);
    auto fail = [&](std::string why) {
        if (!st.inconsistent) {
            st.inconsistent = true;
            st.reason = std::move(why);
        }
    };

    // Partition by the sigma relation, class of 0^n first, the rest by
    // smallest member.
    auto partition = [&](const PartialFunction& f) {
        std::vector<Code> pts;
        for (const auto& [x, t] : f.entries()) {
            pts.push_back(x);
            std::vector<Code> sorted = t;
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) fail("tuple repeats a value");
        }
        std::vector<std::size_t> parent(pts.size());
        std::iota(parent.begin(), parent.end(), 0u);
        std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
            return parent[i] == i ? i : parent[i] = find(parent[i]);
        };
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t j = i + 1; j < pts.size(); ++j) {
                const auto& ti = f.at(pts[i]);
                const auto& tj = f.at(pts[j]);
                if (auto l = sigma_relation(ti, tj, sigmas)) {
                    if (*l == 0) fail("distinct points carry the same tuple");
                    parent[find(i)] = find(j);
                } else {
                    std::vector<Code> si = ti, sj = tj, common;
                    std::sort(si.begin(), si.end());
                    std::sort(sj.begin(), sj.end());
                    std::set_intersection(si.begin(), si.end(), sj.begin(), sj.end(), std::back_inserter(common));
                    if (!common.empty()) fail("unrelated tuples share a value");
                }
            }
        }
        std::map<std::size_t, std::vector<Code>> groups;
        for (std::size_t i = 0; i < pts.size(); ++i) groups[find(i)].push_back(pts[i]);
        std::vector<std::vector<Code>> classes;
        for (auto& [root, members] : groups) classes.push_back(std::move(members));  // members already sorted
        std::sort(classes.begin(), classes.end(), [](const auto& x, const auto& y) {
            const bool zx = x.front() == 0, zy = y.front() == 0;
            if (zx != zy) return zx;
            return x.front() < y.front();
        });
        return classes;
    };

    const auto initial = partition(s);
    const auto& s0 = s.at(0);

    // Rewrite: a^{i,j} -> a^{i,j} - a^{i,1} carrying sigma_l s(0^n).
    std::map<Code, std::vector<Code>> merged;
    auto put = [&](Code x, std::vector<Code> t) {
        auto [it, fresh] = merged.emplace(x, t);
        if (!fresh && it->second != t) fail("rewrite assigns two tuples to one point");
    };
    for (std::size_t c = 0; c < initial.size(); ++c) {
        const auto& cls = initial[c];
        if (c == 0) {
            for (auto x : cls) put(x, s.at(x));
            continue;
        }
        const Code anchor = cls.front();
        put(anchor, s.at(anchor));
        for (std::size_t j = 1; j < cls.size(); ++j) {
            const auto l = sigma_relation(s.at(anchor), s.at(cls[j]), sigmas);
            if (!l) continue;  // unreachable for a consistent partition
            std::vector<Code> t(D);
            for (std::size_t q = 0; q < D; ++q) t[q] = s0[sigmas[*l][q]];
            put(arith.sub(cls[j], anchor), std::move(t));
        }
    }
    for (auto& [x, t] : merged) st.normalized.set(x, t);

    st.classes = partition(st.normalized);
    for (const auto& cls : st.classes) st.sizes.push_back(cls.size());
    for (std::size_t c = 1; c < st.classes.size(); ++c) {
        if (st.classes[c].size() > 1) fail("rewrite left a class outside A^1 with several points");
    }

    // K' and the linear index check on A^1.
    std::vector<GroupVector> a1;
    for (auto x : st.classes[0]) a1.push_back(GroupVector::from_code(a, x));
    st.k_prime = canonical_basis(a, a1);
    st.d_prime = st.k_prime.dim();
    const std::uint32_t d = log_p_exact(a.p, D);
    {
        const Ambient idx{a.p, d}, both{a.p, a.n + d};
        std::vector<GroupVector> ls, joint;
        for (auto x : st.classes[0]) {
            const auto l = sigma_relation(s0, st.normalized.at(x), sigmas);
            if (!l) continue;
            const IndexVector iv = IndexVector::from_index(a.p, d, *l);
            std::vector<std::uint32_t> lc(iv.digits().begin(), iv.digits().end());
            ls.emplace_back(idx, lc);
            const GroupVector xv = GroupVector::from_code(a, x);
            std::vector<std::uint32_t> jc(xv.coords().begin(), xv.coords().end());
            jc.insert(jc.end(), lc.begin(), lc.end());
            joint.emplace_back(both, jc);
        }
        const auto r_pts = st.d_prime;
        if (rank(idx, ls) != r_pts || rank(both, joint) != r_pts) fail("sigma indices are not linear in A^1");
    }

    for (const auto& cls : st.classes) st.anchors.push_back(cls.front());
    for (std::size_t i = 0; i < st.anchors.size(); ++i) {
        for (std::size_t j = i + 1; j < st.anchors.size(); ++j) {
            if (st.k_prime.contains_code(arith.sub(st.anchors[i], st.anchors[j]))) {
                fail("two anchors share a K' coset");
            }
        }
    }
    for (auto x : st.anchors) {
        const auto v = GroupVector::from_code(a, x);
        if (st.k_prime.reduce(v) == v) ++st.w_prime;
    }
    return st;
}

// ---------------------------------------------------------------------------
// Closed-form factors

Rational q_s_R_poly(std::uint32_t p, std::uint32_t n, std::uint32_t d_prime, const Rational& D) {
    return containment_poly(p, n, d_prime, D);
}

Rational q_s_R(std::uint32_t p, std::uint32_t n, std::uint32_t d_prime, std::uint64_t D) {
    const std::uint32_t d = log_p_exact(p, D);
    if (d > n) throw std::invalid_argument("D exceeds p^n");
    if (d < d_prime) return 0;
    return q_s_R_poly(p, n, d_prime, Rational(BigInt(D)));
}

Rational q_s_R(const DomainStructure& st, std::uint64_t D) { return q_s_R(st.ambient.p, st.ambient.n, st.d_prime, D); }

Rational nu_t(std::uint32_t w_prime, std::uint32_t p, std::uint32_t n) {
    const std::uint64_t size = checked_pow(p, n);
    if (w_prime > size) throw std::invalid_argument("w' exceeds p^n");
    BigInt denom = 1;
    for (std::uint32_t i = 0; i < w_prime; ++i) denom *= size - i;
    return Rational(1) / Rational(denom);
}

Rational lambda_t_poly(const std::vector<GroupVector>& anchors, std::uint32_t p, std::uint32_t n_q, const Rational& E) {
    const Ambient q{p, n_q};
    std::vector<GroupVector> diffs;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        if (anchors[i].ambient() != q) throw std::invalid_argument("anchor outside the quotient ambient");
        for (std::size_t j = i + 1; j < anchors.size(); ++j) diffs.push_back(anchors[i] - anchors[j]);
    }
    if (diffs.size() > 20) throw std::length_error("too many anchor pairs for inclusion-exclusion");
    Rational total = 0;
    std::vector<GroupVector> chosen;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << diffs.size()); ++mask) {
        chosen.clear();
        for (std::size_t b = 0; b < diffs.size(); ++b) {
            if (mask >> b & 1) chosen.push_back(diffs[b]);
        }
        const Rational term = containment_poly(p, n_q, rank(q, chosen), E);
        if (std::popcount(mask) % 2 == 0) {
            total += term;
        } else {
            total -= term;
        }
    }
    return total;
}

Rational lambda_t(const std::vector<GroupVector>& anchors, std::uint32_t p, std::uint32_t n_q, std::uint64_t E) {
    const std::uint32_t e = log_p_exact(p, E);
    if (e > n_q) throw std::invalid_argument("E exceeds the quotient order");
    return lambda_t_poly(anchors, p, n_q, Rational(BigInt(E)));
}

FactoredQ q_s_factored_parts(const DomainStructure& st, std::uint64_t D) {
    FactoredQ f{0, 0, 0, 0};
    if (st.inconsistent) return f;
    const auto& a = st.ambient;
    const std::uint32_t d = log_p_exact(a.p, D);
    if (d > a.n) throw std::invalid_argument("D exceeds p^n");
    const Rational Dr(BigInt{D});
    f.q_r = q_s_R_poly(a.p, a.n, st.d_prime, Dr);
    f.nu = nu_t(st.w_prime, a.p, a.n);
    f.lambda = lambda_t_poly(st.quotient_anchors(), a.p, a.n - st.d_prime, Dr / Rational(BigInt(st.D_prime())));
    f.value = d < st.d_prime ? Rational(0) : f.q_r * f.nu * f.lambda;
    return f;
}

Rational q_s_factored(const PartialFunction& s) {
    if (s.empty()) return 1;
    if (s.contains(0)) return q_s_factored_parts(domain_structure(s), s.arity()).value;

    // Sum over the admissible values of O(0^n): tuples of distinct entries.
    const Ambient& a = s.ambient();
    const std::uint64_t N = a.size(), D = s.arity();
    BigInt arrangements = 1;
    for (std::uint64_t i = 0; i < D; ++i) arrangements *= N - i;
    if (arrangements > 1'000'000) throw std::length_error("0^n insertion sum too large");
    Rational total = 0;
    std::vector<Code> t(D);
    std::vector<bool> used(N, false);
    std::function<void(std::size_t)> rec = [&](std::size_t j) {
        if (j == D) {
            PartialFunction s2 = s;
            s2.set(0, t);
            total += q_s_factored_parts(domain_structure(s2), D).value;
            return;
        }
        for (Code y = 0; y < N; ++y) {
            if (used[y]) continue;
            used[y] = true;
            t[j] = y;
            rec(j + 1);
            used[y] = false;
        }
    };
    rec(0);
    return total;
}

Rational pad_extension_fraction(std::uint32_t p, std::uint32_t n, const std::vector<std::map<Code, Code>>& pads) {
    const std::uint64_t N = checked_pow(p, n);
    Rational r = 1;
    for (const auto& pad : pads) {
        std::vector<Code> values;
        for (const auto& [x, y] : pad) {
            if (x >= N || y >= N) throw std::invalid_argument("pad entry out of range");
            values.push_back(y);
        }
        std::sort(values.begin(), values.end());
        if (std::adjacent_find(values.begin(), values.end()) != values.end()) return 0;
        for (std::size_t i = 0; i < pad.size(); ++i) r /= Rational(BigInt(N - i));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Degree fitting

double RationalPolynomialFit::evaluate(double x) const {
    double v = 0, xp = 1;
    for (double c : coefficients) {
        v += c * xp;
        xp *= x;
    }
    return v;
}

RationalPolynomialFit fit_degree_exact(const std::vector<std::pair<Rational, Rational>>& points) {
    std::vector<double> xs;
    for (const auto& pt : points) xs.push_back(to_double(pt.first));
    require_fit_points(points.size(), xs);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            if (points[i].first == points[j].first) throw std::invalid_argument("fit_degree needs distinct abscissae");
        }
    }
    const std::size_t m = points.size();

    // Newton divided differences; truncating after k terms interpolates the
    // first k + 1 points.
    std::vector<Rational> dd(m);
    for (std::size_t i = 0; i < m; ++i) dd[i] = points[i].second;
    std::vector<Rational> newton{dd[0]};
    for (std::size_t level = 1; level < m; ++level) {
        for (std::size_t i = m - 1; i >= level; --i) {
            dd[i] = (dd[i] - dd[i - 1]) / (points[i].first - points[i - level].first);
        }
        newton.push_back(dd[level]);
    }
    auto newton_eval = [&](std::size_t k, const Rational& x) {
        Rational v = newton[k];
        for (std::size_t j = k; j-- > 0;) v = v * (x - points[j].first) + newton[j];
        return v;
    };

    RationalPolynomialFit fit;
    fit.exact = true;
    for (const auto& [x, y] : points) fit.points.push_back(FitPoint{to_double(x), to_double(y), x, y});
    std::size_t k = 0;
    for (; k < m; ++k) {
        bool ok = true;
        for (std::size_t i = k + 1; i < m && ok; ++i) ok = newton_eval(k, points[i].first) == points[i].second;
        if (ok) break;
    }
    fit.degree = k;

    // Monomial coefficients of the truncated Newton form.
    std::vector<Rational> coef{newton[k]};
    for (std::size_t j = k; j-- > 0;) {
        std::vector<Rational> next(coef.size() + 1, Rational(0));
        for (std::size_t q = 0; q < coef.size(); ++q) {
            next[q + 1] += coef[q];
            next[q] -= coef[q] * points[j].first;
        }
        next[0] += newton[j];
        coef = std::move(next);
    }
    coef.resize(k + 1);
    fit.exact_coefficients = coef;
    for (const auto& c : coef) fit.coefficients.push_back(to_double(c));

    std::vector<std::pair<double, double>> fp;
    for (const auto& pt : fit.points) fp.emplace_back(pt.x, pt.y);
    fit.residual = 0;
    fit.lower_residual = k == 0 ? std::numeric_limits<double>::quiet_NaN()
                                : max_abs_residual(least_squares(fp, k - 1), fp);
    return fit;
}

RationalPolynomialFit fit_degree_float(const std::vector<std::pair<double, double>>& points, double tolerance) {
    std::vector<double> xs;
    for (const auto& pt : points) xs.push_back(pt.first);
    require_fit_points(points.size(), xs);
    RationalPolynomialFit fit;
    fit.tolerance = tolerance;
    for (const auto& [x, y] : points) fit.points.push_back(FitPoint{x, y, std::nullopt, std::nullopt});
    double previous = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < points.size(); ++k) {
        const Eigen::VectorXd c = least_squares(points, k);
        const double r = max_abs_residual(c, points);
        if (r <= tolerance || k + 1 == points.size()) {
            fit.degree = k;
            fit.coefficients.assign(c.data(), c.data() + c.size());
            fit.residual = r;
            fit.lower_residual = previous;
            return fit;
        }
        previous = r;
    }
    return fit;
}

RationalPolynomialFit fit_degree(const std::vector<FitPoint>& points, double tolerance) {
    const bool all_exact = std::all_of(points.begin(), points.end(),
                                       [](const FitPoint& pt) { return pt.exact_x && pt.exact_y; });
    if (all_exact && !points.empty()) {
        std::vector<std::pair<Rational, Rational>> pts;
        for (const auto& pt : points) pts.emplace_back(*pt.exact_x, *pt.exact_y);
        auto fit = fit_degree_exact(pts);
        fit.tolerance = 0;
        return fit;
    }
    std::vector<std::pair<double, double>> pts;
    for (const auto& pt : points) pts.emplace_back(pt.x, pt.y);
    return fit_degree_float(pts, tolerance);
}

Rational lagrange_predict(const std::vector<std::pair<Rational, Rational>>& points, const Rational& x) {
    Rational total = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        Rational term = points[i].second;
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (j == i) continue;
            if (points[i].first == points[j].first) throw std::invalid_argument("duplicate abscissa");
            term *= (x - points[j].first) / (points[i].first - points[j].first);
        }
        total += term;
    }
    return total;
}

double lagrange_predict(const std::vector<std::pair<double, double>>& points, double x) {
    double total = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double term = points[i].second;
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (j == i) continue;
            if (points[i].first == points[j].first) throw std::invalid_argument("duplicate abscissa");
            term *= (x - points[j].first) / (points[i].first - points[j].first);
        }
        total += term;
    }
    return total;
}

double koiran_degree_bound(double xi, double c, double n) {
    if (!(xi > 1)) throw std::invalid_argument("xi must exceed 1");
    if (n < 0) throw std::invalid_argument("n must be nonnegative");
    if (!(c > 0)) return 0;
    const double num = (n + 3) * std::log2(xi) + std::log2(c) - 1;
    const double den = std::log2(xi * xi * xi / (xi - 1)) + 1;
    return std::max(0.0, std::min(n / 2, num / den));
}

double koiran_bound(std::uint32_t p, double n, double epsilon) {
    if (!is_prime(p)) throw std::invalid_argument("p must be prime");
    if (!(epsilon > 0 && epsilon <= 0.5)) throw std::invalid_argument("epsilon must lie in (0, 1/2]");
    if (epsilon == 0.5) return 0;
    return koiran_degree_bound(p, (2 - 4 * epsilon) / (p - 1), n);
}

// ---------------------------------------------------------------------------
// Q(D)

namespace {

// Acceptance probability of an algorithm with no inert blocks left.
double accept_direct(const QueryAlgorithm& alg, OracleTables tables, const std::vector<bool>& accepting) {
    const RunResult r = run(alg, tables);
    double acc = 0;
    const auto amps = r.state.amplitudes();
    for (std::uint64_t i = 0; i < amps.size(); ++i) {
        if (accepting[i]) acc += std::norm(amps[i]);
    }
    return std::clamp(acc, 0.0, 1.0);
}

std::vector<bool> accepting_mask(const QueryAlgorithm& alg) {
    const StateVector probe(alg.layout.p, alg.layout.total_digits());
    std::vector<bool> mask(probe.size(), false);
    std::vector<bool> ok(alg.outcome_space(), false);
    for (auto o : alg.accept) ok[o] = true;
    for (std::uint64_t i = 0; i < probe.size(); ++i) {
        std::uint64_t o = 0;
        for (auto d : alg.measured) o = o * alg.layout.p + probe.digit(i, d);
        mask[i] = ok[o];
    }
    return mask;
}

// Visits every member of F_D* as the tables of the requested blocks.
template <class F>
void for_each_core(std::uint32_t p, std::uint32_t n, std::uint64_t D, const std::vector<std::uint32_t>& blocks, F&& f) {
    const DigitArithmetic arith(p, n);
    const std::uint64_t size = arith.size();
    std::vector<OracleTable> tables(blocks.size(), OracleTable(size));
    for (const Subgroup& k : enumerate_subgroups(p, n, log_p_exact(p, D))) {
        const auto ks = k.element_codes();
        PiKEnumerator it(k);
        while (auto o0 = it.next()) {
            for (std::size_t b = 0; b < blocks.size(); ++b) {
                for (Code x = 0; x < size; ++x) tables[b][x] = (*o0)(arith.add(x, ks[blocks[b]]));
            }
            f(tables);
        }
    }
}

void core_tables_from(const OracleSequence& o, const std::vector<std::uint32_t>& blocks, std::vector<OracleTable>& out) {
    out.resize(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) out[b] = o[blocks[b]].table();
}

}  // namespace

QOfDResult q_of_d_enumerated(const QueryAlgorithm& alg, std::uint32_t p, std::uint32_t n, std::uint64_t D,
                             std::uint32_t N, const QOfDOptions& opts) {
    if (alg.model != QueryModel::kSynchronized) throw std::invalid_argument("q_of_d expects a synchronized algorithm");
    if (alg.layout.p != p || alg.layout.query_digits != n) throw std::invalid_argument("algorithm layout mismatch");
    if (alg.layout.answer_blocks != N) throw std::invalid_argument("algorithm must have N answer blocks");
    const std::uint32_t d = log_p_exact(p, D);
    if (d > n) throw std::invalid_argument("D exceeds p^n");
    if (D > N) throw std::invalid_argument("D exceeds N");
    alg.validate(false);

    const InertReduction red = reduce_inert_blocks(alg);
    const QueryAlgorithm& A = red.reduced;
    const std::uint64_t size = checked_pow(p, n);
    std::vector<std::uint32_t> core_blocks, pad_slots;  // core: original index; pads: slot in kept order
    std::vector<std::size_t> core_slots;
    for (std::size_t s = 0; s < red.kept_blocks.size(); ++s) {
        if (red.kept_blocks[s] < D) {
            core_blocks.push_back(red.kept_blocks[s]);
            core_slots.push_back(s);
        } else {
            pad_slots.push_back(static_cast<std::uint32_t>(s));
        }
    }
    const auto mask = accepting_mask(A);
    const BigInt core_count = core_blocks.empty() ? BigInt(1) : F_D_star_count(p, n, D);
    const std::uint64_t T = A.query_count();

    QOfDResult res;
    std::vector<std::span<const std::uint32_t>> spans(red.kept_blocks.size());
    std::vector<OracleTable> pads(pad_slots.size(), OracleTable(size));
    auto evaluate = [&](const std::vector<OracleTable>& cores) {
        for (std::size_t c = 0; c < core_slots.size(); ++c) spans[core_slots[c]] = cores[c];
        for (std::size_t q = 0; q < pad_slots.size(); ++q) spans[pad_slots[q]] = pads[q];
        ++res.evaluations;
        return accept_direct(A, spans, mask);
    };
    auto over_cores = [&](auto&& f) {
        if (core_blocks.empty()) {
            f(std::vector<OracleTable>{});
        } else {
            for_each_core(p, n, D, core_blocks, f);
        }
    };
    const double count_d = core_count.convert_to<double>();

    // No active pad: a plain average over F_D*.
    if (pad_slots.empty() && core_count <= BigInt(opts.nested_cap) && opts.pad_mode != PadMode::kSampled) {
        double sum = 0;
        over_cores([&](const std::vector<OracleTable>& cores) { sum += evaluate(cores); });
        res.value = sum / count_d;
        res.exact = true;
        res.method = "enumerate";
        return res;
    }

    // One active pad under a single forward or inverse call: the pad
    // permutation only enters through the pair statistics of its values.
    const bool analytic_ok = pad_slots.size() == 1 && T == 1 && size >= 2 &&
                             core_count <= BigInt(opts.nested_cap) &&
                             (opts.pad_mode == PadMode::kAuto || opts.pad_mode == PadMode::kAnalytic);
    std::uint64_t cache_entries = size * size;
    for (std::size_t c = 0; c < core_blocks.size() && cache_entries < (std::uint64_t{1} << 40); ++c) cache_entries *= size;
    std::uint64_t accepting = 0;
    for (bool b : mask) accepting += b;
    if (analytic_ok && cache_entries * std::max<std::uint64_t>(accepting, 1) <= (std::uint64_t{1} << 27)) {
        std::size_t call = 0;
        while (!std::holds_alternative<OracleCall>(A.stages[call])) ++call;
        StateVector pre(p, A.layout.total_digits());
        for (std::size_t i = 0; i < call; ++i) apply_stage(pre, A.stages[i], A.layout, A.model, {});
        std::vector<std::uint64_t> acc_index;
        for (std::uint64_t i = 0; i < mask.size(); ++i) {
            if (mask[i]) acc_index.push_back(i);
        }
        const Range query = A.layout.query();
        std::unordered_map<std::uint64_t, std::vector<Amplitude>> cache;
        std::vector<OracleTable> const_tables(red.kept_blocks.size(), OracleTable(size));
        auto xi = [&](Code x, Code u, const std::vector<Code>& c) -> const std::vector<Amplitude>& {
            std::uint64_t key = x * size + u;
            for (auto v : c) key = key * size + v;
            auto it = cache.find(key);
            if (it != cache.end()) return it->second;
            StateVector s = pre;
            auto amps = s.amplitudes();
            for (std::uint64_t i = 0; i < amps.size(); ++i) {
                if (s.read(i, query) != x) amps[i] = 0;
            }
            for (std::size_t q = 0; q < core_slots.size(); ++q) {
                std::fill(const_tables[core_slots[q]].begin(), const_tables[core_slots[q]].end(), static_cast<std::uint32_t>(c[q]));
            }
            std::fill(const_tables[pad_slots[0]].begin(), const_tables[pad_slots[0]].end(), static_cast<std::uint32_t>(u));
            std::vector<std::span<const std::uint32_t>> ts(const_tables.begin(), const_tables.end());
            for (std::size_t i = call; i < A.stages.size(); ++i) apply_stage(s, A.stages[i], A.layout, A.model, ts);
            std::vector<Amplitude> v(acc_index.size());
            for (std::size_t j = 0; j < acc_index.size(); ++j) v[j] = s[acc_index[j]];
            ++res.evaluations;
            return cache.emplace(key, std::move(v)).first->second;
        };
        auto norm2 = [](const std::vector<Amplitude>& v) {
            double t = 0;
            for (const auto& a : v) t += std::norm(a);
            return t;
        };
        const double Nd = static_cast<double>(size);
        double sum = 0;
        std::vector<Amplitude> total(acc_index.size());
        std::vector<std::vector<Amplitude>> by_u(size, std::vector<Amplitude>(acc_index.size()));
        std::vector<Amplitude> by_x(acc_index.size());
        std::vector<Code> c(core_blocks.size());
        over_cores([&](const std::vector<OracleTable>& cores) {
            std::fill(total.begin(), total.end(), Amplitude{});
            for (auto& v : by_u) std::fill(v.begin(), v.end(), Amplitude{});
            double diag = 0, phi = 0, psi = 0;
            for (Code x = 0; x < size; ++x) {
                for (std::size_t q = 0; q < cores.size(); ++q) c[q] = cores[q][x];
                std::fill(by_x.begin(), by_x.end(), Amplitude{});
                for (Code u = 0; u < size; ++u) {
                    const auto& v = xi(x, u, c);
                    diag += norm2(v);
                    for (std::size_t j = 0; j < v.size(); ++j) {
                        by_x[j] += v[j];
                        by_u[u][j] += v[j];
                    }
                }
                phi += norm2(by_x);
                for (std::size_t j = 0; j < by_x.size(); ++j) total[j] += by_x[j];
            }
            for (const auto& v : by_u) psi += norm2(v);
            const double value = diag / Nd + (norm2(total) - phi - psi + diag) / (Nd * (Nd - 1));
            sum += std::clamp(value, 0.0, 1.0);
        });
        res.value = sum / count_d;
        res.exact = true;
        res.method = "analytic-pad";
        return res;
    }

    // Every pad permutation for every core member, at tiny sizes.
    BigInt pad_perms = 1;
    for (std::size_t q = 0; q < pad_slots.size(); ++q) {
        BigInt f = 1;
        for (std::uint64_t i = 2; i <= size; ++i) f *= i;
        pad_perms *= f;
    }
    const bool nested_ok = opts.pad_mode != PadMode::kSampled && opts.pad_mode != PadMode::kAnalytic &&
                           core_count * pad_perms <= BigInt(opts.nested_cap);
    if (nested_ok) {
        double sum = 0;
        over_cores([&](const std::vector<OracleTable>& cores) {
            for (auto& t : pads) std::iota(t.begin(), t.end(), 0u);
            std::function<void(std::size_t)> rec = [&](std::size_t q) {
                if (q == pads.size()) {
                    sum += evaluate(cores);
                    return;
                }
                std::iota(pads[q].begin(), pads[q].end(), 0u);
                do {
                    rec(q + 1);
                } while (std::next_permutation(pads[q].begin(), pads[q].end()));
            };
            rec(0);
        });
        res.value = sum / (count_d * pad_perms.convert_to<double>());
        res.exact = true;
        res.method = pad_slots.empty() ? "enumerate" : "nested";
        return res;
    }

    if (!opts.allow_sampling) throw std::length_error("q_of_d: enumeration cap exceeded and sampling disabled");
    if (opts.samples < 2) throw std::invalid_argument("sampling needs at least two samples");

    // Stratified by hidden subgroup when the subgroups can be listed.
    Rng rng(opts.seed);
    std::vector<Subgroup> strata;
    if (!core_blocks.empty()) {
        try {
            strata = enumerate_subgroups(p, n, d);
        } catch (const std::length_error&) {
            strata.clear();
        }
    }
    std::vector<OracleTable> cores;
    auto draw = [&](const Subgroup& k) {
        const OracleSequence o = build_sequence(sample_pi_K(k, rng), k);
        core_tables_from(o, core_blocks, cores);
        for (auto& t : pads) {
            std::iota(t.begin(), t.end(), 0u);
            rng.shuffle(std::span<std::uint32_t>(t));
        }
        return evaluate(cores);
    };
    if (!strata.empty() && strata.size() <= opts.samples / 2) {
        const std::uint64_t per = opts.samples / strata.size();
        double mean = 0, var = 0;
        for (const auto& k : strata) {
            double s1 = 0, s2 = 0;
            for (std::uint64_t j = 0; j < per; ++j) {
                const double v = draw(k);
                s1 += v;
                s2 += v * v;
            }
            const double m = s1 / static_cast<double>(per);
            const double sv = std::max(0.0, (s2 - s1 * m) / static_cast<double>(per - 1));
            mean += m;
            var += sv / static_cast<double>(per);
        }
        const double S = static_cast<double>(strata.size());
        res.value = mean / S;
        res.std_error = std::sqrt(var) / S;
        res.method = "stratified";
    } else {
        double s1 = 0, s2 = 0;
        for (std::uint64_t j = 0; j < opts.samples; ++j) {
            const Subgroup k = core_blocks.empty() ? Subgroup::trivial(Ambient{p, n}) : random_subgroup(Ambient{p, n}, d, rng);
            const double v = draw(k);
            s1 += v;
            s2 += v * v;
        }
        const double m = s1 / static_cast<double>(opts.samples);
        const double sv = std::max(0.0, (s2 - s1 * m) / static_cast<double>(opts.samples - 1));
        res.value = m;
        res.std_error = std::sqrt(sv / static_cast<double>(opts.samples));
        res.method = "sampled";
    }
    res.exact = false;
    return res;
}

// ---------------------------------------------------------------------------
// Corpus and degree ledger

std::vector<CorpusEntry> make_corpus(std::uint32_t p, std::uint32_t n, std::size_t count,
                                     const std::vector<std::uint64_t>& Ds, std::uint64_t seed) {
    const Ambient a{p, n};
    a.validate();
    const std::uint64_t size = a.size();
    std::vector<CorpusEntry> out;
    for (std::size_t e = 0; e < count; ++e) {
        Rng rng(derive_seed(seed, e));
        CorpusEntry entry;
        entry.domain.push_back(0);
        const std::uint64_t extra = std::min<std::uint64_t>(rng.below(4), size - 1);
        while (entry.domain.size() < extra + 1) {
            const Code x = 1 + rng.below(size - 1);
            if (std::find(entry.domain.begin(), entry.domain.end(), x) == entry.domain.end()) entry.domain.push_back(x);
        }
        std::sort(entry.domain.begin(), entry.domain.end());
        for (std::size_t j = 0; j < Ds.size(); ++j) {
            const OracleSequence o = sample_F_D_star(p, n, Ds[j], derive_seed(seed ^ 0x5eedULL, e * 64 + j));
            entry.by_D.emplace(Ds[j], PartialFunction::restrict(o, entry.domain));
        }
        out.push_back(std::move(entry));
    }
    return out;
}

bool DegreeRecord::all_equal() const {
    return std::all_of(equal.begin(), equal.end(), [](const auto& kv) { return kv.second; });
}

bool DegreeRecord::bounds_ok() const {
    return std::all_of(fits.begin(), fits.end(), [](const StructureFit& f) { return f.ok(); });
}

DegreeRecord degree_record(const CorpusEntry& e) {
    DegreeRecord r;
    r.domain = e.domain;
    if (e.by_D.size() < 2) throw std::invalid_argument("degree_record needs at least two D values");
    std::vector<std::pair<Rational, Rational>> enum_pts;
    for (const auto& [D, s] : e.by_D) {
        r.enumerated[D] = q_s_enumerated(s);
        r.factored[D] = s.contains(0) ? q_s_factored_parts(domain_structure(s), D)
                                      : FactoredQ{0, 0, 0, q_s_factored(s)};
        r.equal[D] = r.enumerated[D] == r.factored[D].value;
        enum_pts.emplace_back(Rational(BigInt(D)), r.enumerated[D]);
    }
    r.fit_enumerated = fit_degree_exact(enum_pts);
    r.bound_enumerated = r.fit_enumerated.degree <= e.domain.size();

    for (const auto& [source, s] : e.by_D) {
        if (!s.contains(0)) continue;
        const DomainStructure st = domain_structure(s);
        StructureFit f;
        f.source_D = source;
        f.dom = s.size();
        f.v1 = st.v1();
        f.w = st.w();
        f.d_prime = st.d_prime;
        f.w_prime = st.w_prime;
        f.inconsistent = st.inconsistent;
        std::vector<std::pair<Rational, Rational>> q, qr, qc;
        for (const auto& kv : e.by_D) {
            const Rational x(BigInt(kv.first));
            const FactoredQ parts = q_s_factored_parts(st, kv.first);
            q.emplace_back(x, parts.value);
            qr.emplace_back(x, parts.q_r);
            qc.emplace_back(x, parts.nu * parts.lambda);
        }
        f.fit_q = fit_degree_exact(q);
        f.fit_q_r = fit_degree_exact(qr);
        f.fit_q_c = fit_degree_exact(qc);
        f.bound_q_r = f.fit_q_r.degree + 1 <= std::max<std::size_t>(f.v1, 1);
        f.bound_q_c = f.fit_q_c.degree <= f.w;
        f.bound_q = f.fit_q.degree <= f.dom;
        r.fits.push_back(std::move(f));
    }
    return r;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const DomainStructure& st) {
    nlohmann::json j;
    j["p"] = st.ambient.p;
    j["n"] = st.ambient.n;
    j["D"] = st.D;
    j["normalized"] = st.normalized.to_string();
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& cls : st.classes) {
        nlohmann::json c = nlohmann::json::array();
        for (auto x : cls) c.push_back(GroupVector::from_code(st.ambient, x).to_string());
        classes.push_back(c);
    }
    j["classes"] = classes;
    j["sizes"] = st.sizes;
    j["v1"] = st.v1();
    j["w"] = st.w();
    j["d_prime"] = st.d_prime;
    j["D_prime"] = st.D_prime();
    j["w_prime"] = st.w_prime;
    j["k_prime"] = st.k_prime.to_string();
    nlohmann::json anchors = nlohmann::json::array();
    for (auto x : st.anchors) anchors.push_back(GroupVector::from_code(st.ambient, x).to_string());
    j["anchors"] = anchors;
    j["inconsistent"] = st.inconsistent;
    if (st.inconsistent) j["reason"] = st.reason;
    return j;
}

nlohmann::json to_json(const RationalPolynomialFit& f) {
    nlohmann::json j;
    j["degree"] = f.degree;
    j["exact"] = f.exact;
    j["residual"] = f.residual;
    j["lower_residual"] = std::isnan(f.lower_residual) ? nlohmann::json(nullptr) : nlohmann::json(f.lower_residual);
    j["tolerance"] = f.tolerance;
    j["coefficients"] = f.coefficients;
    if (f.exact_coefficients) {
        nlohmann::json c = nlohmann::json::array();
        for (const auto& r : *f.exact_coefficients) c.push_back(to_string(r));
        j["exact_coefficients"] = c;
    }
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& pt : f.points) {
        nlohmann::json q{{"x", pt.x}, {"y", pt.y}};
        if (pt.exact_y) q["y_exact"] = to_string(*pt.exact_y);
        pts.push_back(q);
    }
    j["points"] = pts;
    return j;
}

nlohmann::json to_json(const DegreeRecord& r) {
    nlohmann::json j;
    j["domain_size"] = r.domain.size();
    nlohmann::json per_d = nlohmann::json::object();
    for (const auto& [D, q] : r.enumerated) {
        const FactoredQ& f = r.factored.at(D);
        per_d[std::to_string(D)] = {
            {"enumerated", to_string(q)},  {"factored", to_string(f.value)}, {"q_r", to_string(f.q_r)},
            {"nu", to_string(f.nu)},       {"lambda", to_string(f.lambda)},  {"equal", r.equal.at(D)},
        };
    }
    j["by_D"] = per_d;
    nlohmann::json fits = nlohmann::json::array();
    for (const auto& f : r.fits) {
        fits.push_back({
            {"source_D", f.source_D},
            {"dom", f.dom},
            {"v1", f.v1},
            {"w", f.w},
            {"d_prime", f.d_prime},
            {"w_prime", f.w_prime},
            {"inconsistent", f.inconsistent},
            {"deg_q", f.fit_q.degree},
            {"deg_q_r", f.fit_q_r.degree},
            {"deg_q_c", f.fit_q_c.degree},
            {"bound_q", f.bound_q},
            {"bound_q_r", f.bound_q_r},
            {"bound_q_c", f.bound_q_c},
        });
    }
    j["structures"] = fits;
    j["deg_enumerated"] = r.fit_enumerated.degree;
    j["bound_enumerated"] = r.bound_enumerated;
    j["all_equal"] = r.all_equal();
    j["bounds_ok"] = r.bounds_ok();
    return j;
}

}  // namespace emq
