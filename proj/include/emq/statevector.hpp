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

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "emq/circuit.hpp"

namespace emq {

using Amplitude = std::complex<double>;

inline constexpr std::uint64_t kDefaultAmplitudeCap = std::uint64_t{1} << 26;

/// Dense state of `digits` qudits of dimension p. Digit k has stride
/// p^(digits - 1 - k), so digit 0 is most significant.
class StateVector {
public:
    /// Starts in |0...0>. Throws std::length_error above the cap.
    StateVector(std::uint32_t p, std::uint32_t digits, std::uint64_t cap = kDefaultAmplitudeCap);

    std::uint32_t p() const { return p_; }
    std::uint32_t digits() const { return digits_; }
    std::uint64_t size() const { return amps_.size(); }
    std::span<const Amplitude> amplitudes() const { return amps_; }
    std::span<Amplitude> amplitudes() { return amps_; }
    Amplitude operator[](std::uint64_t i) const { return amps_[i]; }

    void set_basis(std::uint64_t index);
    double norm_squared() const;

    std::uint64_t stride(std::uint32_t digit) const { return pow_[digits_ - 1 - digit]; }
    std::uint32_t digit(std::uint64_t index, std::uint32_t k) const {
        return static_cast<std::uint32_t>(index / stride(k) % p_);
    }
    /// Value of a contiguous register, first digit most significant.
    std::uint64_t read(std::uint64_t index, Range r) const {
        return r.len == 0 ? 0 : index / pow_[digits_ - r.end()] % pow_[r.len];
    }
    std::uint64_t write(std::uint64_t index, Range r, std::uint64_t value) const {
        if (r.len == 0) return index;
        const std::uint64_t s = pow_[digits_ - r.end()];
        return index - read(index, r) * s + value * s;
    }

    void apply_qft(std::uint32_t begin, std::uint32_t end, bool inverse = false);
    /// Unitary on a single digit (row-major p x p).
    void apply_digit(std::uint32_t k, std::span<const Amplitude> matrix);
    void apply_dense(std::span<const std::uint32_t> digits, std::span<const Amplitude> matrix);

    /// |i> -> |f(i)>; f must be a bijection on [0, size).
    template <class F>
    void permute_basis(F&& f) {
        scratch_.assign(amps_.size(), Amplitude{});
        for (std::uint64_t i = 0; i < amps_.size(); ++i) {
            if (amps_[i] != Amplitude{}) scratch_[f(i)] = amps_[i];
        }
        amps_.swap(scratch_);
    }

    /// Probability of each value of the listed digits, first most significant.
    std::vector<double> marginal(std::span<const std::uint32_t> digits) const;

private:
    std::uint32_t p_;
    std::uint32_t digits_;
    std::vector<std::uint64_t> pow_;
    std::vector<Amplitude> amps_;
    std::vector<Amplitude> scratch_;
};

/// The p x p Fourier matrix, entry (a, b) = w^(ab)/sqrt(p), w = exp(2 pi i/p).
std::vector<Amplitude> fourier_matrix(std::uint32_t p, bool inverse = false);

}  // namespace emq
