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

#include "emq/statevector.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "emq/group.hpp"

namespace emq {

StateVector::StateVector(std::uint32_t p, std::uint32_t digits, std::uint64_t cap) : p_(p), digits_(digits) {
    if (!is_prime(p)) throw std::invalid_argument("qudit dimension must be prime");
    pow_.resize(digits + 1);
    pow_[0] = 1;
    for (std::uint32_t k = 1; k <= digits; ++k) {
        if (pow_[k - 1] > cap / p) {
            throw std::length_error("state of " + std::to_string(digits) + " digits exceeds amplitude cap");
        }
        pow_[k] = pow_[k - 1] * p;
    }
    amps_.assign(pow_[digits], Amplitude{});
    amps_[0] = 1.0;
}

void StateVector::set_basis(std::uint64_t index) {
    if (index >= amps_.size()) throw std::out_of_range("basis index outside state");
    std::fill(amps_.begin(), amps_.end(), Amplitude{});
    amps_[index] = 1.0;
}

double StateVector::norm_squared() const {
    double acc = 0;
    for (const auto& a : amps_) acc += std::norm(a);
    return acc;
}

std::vector<Amplitude> fourier_matrix(std::uint32_t p, bool inverse) {
    std::vector<Amplitude> m(std::size_t{p} * p);
    const double scale = 1.0 / std::sqrt(static_cast<double>(p));
    const double sign = inverse ? -1.0 : 1.0;
    for (std::uint32_t a = 0; a < p; ++a) {
        for (std::uint32_t b = 0; b < p; ++b) {
            const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>((a * b) % p) / p;
            m[a * p + b] = std::polar(scale, angle);
        }
    }
    return m;
}

void StateVector::apply_digit(std::uint32_t k, std::span<const Amplitude> matrix) {
    if (k >= digits_) throw std::out_of_range("digit outside state");
    if (matrix.size() != std::size_t{p_} * p_) throw std::invalid_argument("digit matrix must be p x p");
    const std::uint64_t s = stride(k);
    const std::uint64_t block = s * p_;
    std::vector<Amplitude> in(p_);
    for (std::uint64_t hi = 0; hi < amps_.size(); hi += block) {
        for (std::uint64_t lo = 0; lo < s; ++lo) {
            const std::uint64_t base = hi + lo;
            for (std::uint32_t b = 0; b < p_; ++b) in[b] = amps_[base + b * s];
            for (std::uint32_t a = 0; a < p_; ++a) {
                Amplitude acc{};
                for (std::uint32_t b = 0; b < p_; ++b) acc += matrix[a * p_ + b] * in[b];
                amps_[base + a * s] = acc;
            }
        }
    }
}

void StateVector::apply_qft(std::uint32_t begin, std::uint32_t end, bool inverse) {
    if (begin > end || end > digits_) throw std::out_of_range("qft range outside state");
    if (p_ == 2) {
        const double h = 1.0 / std::numbers::sqrt2;
        for (std::uint32_t k = begin; k < end; ++k) {
            const std::uint64_t s = stride(k);
            for (std::uint64_t hi = 0; hi < amps_.size(); hi += 2 * s) {
                for (std::uint64_t lo = 0; lo < s; ++lo) {
                    const Amplitude a0 = amps_[hi + lo], a1 = amps_[hi + lo + s];
                    amps_[hi + lo] = h * (a0 + a1);
                    amps_[hi + lo + s] = h * (a0 - a1);
                }
            }
        }
        return;
    }
    const auto f = fourier_matrix(p_, inverse);
    for (std::uint32_t k = begin; k < end; ++k) apply_digit(k, f);
}

void StateVector::apply_dense(std::span<const std::uint32_t> digits, std::span<const Amplitude> matrix) {
    const std::size_t m = digits.size();
    std::uint64_t dim = 1;
    for (std::size_t j = 0; j < m; ++j) {
        if (digits[j] >= digits_) throw std::out_of_range("dense digit outside state");
        dim *= p_;
    }
    if (matrix.size() != dim * dim) throw std::invalid_argument("dense matrix has wrong size");
    // offset[v] = index contribution of sub-register value v.
    std::vector<std::uint64_t> offset(dim, 0);
    for (std::uint64_t v = 0; v < dim; ++v) {
        std::uint64_t rest = v;
        for (std::size_t j = m; j-- > 0;) {
            offset[v] += (rest % p_) * stride(digits[j]);
            rest /= p_;
        }
    }
    std::vector<Amplitude> in(dim);
    for (std::uint64_t base = 0; base < amps_.size(); ++base) {
        bool zero_on_digits = true;
        for (auto d : digits) {
            if (digit(base, d) != 0) {
                zero_on_digits = false;
                break;
            }
        }
        if (!zero_on_digits) continue;
        for (std::uint64_t v = 0; v < dim; ++v) in[v] = amps_[base + offset[v]];
        for (std::uint64_t a = 0; a < dim; ++a) {
            Amplitude acc{};
            for (std::uint64_t b = 0; b < dim; ++b) acc += matrix[a * dim + b] * in[b];
            amps_[base + offset[a]] = acc;
        }
    }
}

std::vector<double> StateVector::marginal(std::span<const std::uint32_t> digits) const {
    std::uint64_t dim = 1;
    for (auto d : digits) {
        if (d >= digits_) throw std::out_of_range("measured digit outside state");
        dim *= p_;
    }
    std::vector<double> out(dim, 0.0);
    for (std::uint64_t i = 0; i < amps_.size(); ++i) {
        const double w = std::norm(amps_[i]);
        if (w == 0) continue;
        std::uint64_t v = 0;
        for (auto d : digits) v = v * p_ + digit(i, d);
        out[v] += w;
    }
    return out;
}

}  // namespace emq
