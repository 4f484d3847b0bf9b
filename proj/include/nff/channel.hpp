// SPDX-License-Identifier: Apache-2.0
//
// nearfield-forge: low-altitude near-field XL-MIMO dataset generator
// Copyright (C) 2026 nearfield-forge contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "nff/raytrace.hpp"

namespace nff {

/// Symmetric baseband grid: f_k = f_c + (k - (K - 1) / 2) * delta_f, k = 0..K-1.
std::vector<double> subcarrier_frequencies(double f_c, double delta_f, int k_count);

/// Index of the subcarrier nearest f_c. For even K the two nearest tie and the lower index wins.
std::size_t center_subcarrier(int k_count);

/// exp(-j 2 pi f d / c), with the cycle count reduced before the trigonometric call.
std::complex<double> propagation_phasor(double frequency_hz, double length_m);

/// M x K channel frequency response.
Eigen::MatrixXcd assemble_channel(const PathSet &paths, const std::vector<double> &frequencies);

/// Channels of one trajectory, shape (M, K, T, 2) in C order; the last axis holds (real, imaginary).
struct CsiTensor {
    int m = 0;
    int k = 0;
    int t = 0;
    double f_c = 0.0;
    double delta_f = 0.0;
    std::vector<double> data;

    std::size_t offset(int mi, int ki, int ti) const
    {
        return ((static_cast<std::size_t>(mi) * static_cast<std::size_t>(k) + static_cast<std::size_t>(ki)) *
                    static_cast<std::size_t>(t) +
                static_cast<std::size_t>(ti)) *
               2;
    }
    std::complex<double> at(int mi, int ki, int ti) const
    {
        const std::size_t o = offset(mi, ki, ti);
        return {data[o], data[o + 1]};
    }
    void set(int mi, int ki, int ti, std::complex<double> v)
    {
        const std::size_t o = offset(mi, ki, ti);
        data[o] = v.real();
        data[o + 1] = v.imag();
    }
    Eigen::MatrixXcd frame(int ti) const;
    /// Single-carrier slice of frame ti at subcarrier ki.
    Eigen::VectorXcd column(int ki, int ti) const;
    double squared_norm() const;
    bool all_finite() const;
};

/// Stacks per-frame M x K matrices. Throws ShapeMismatch when frames disagree on M or K.
CsiTensor stack_frames(const std::vector<Eigen::MatrixXcd> &frames, double f_c, double delta_f);

CsiTensor build_csi_tensor(const std::vector<PathSet> &trajectory_paths, const std::vector<double> &frequencies,
                           double f_c, double delta_f);

struct NoiseModel {
    double sigma2 = 1.0;
    double p_r = 1.0;
};

/// P_r giving `snr_db` for a matched single-antenna-gain LoS link at `range_m` boresight with `m_ref` elements.
double reference_receive_power(double f_c, double sigma2, double snr_db = 20.0, double range_m = 100.0,
                               std::size_t m_ref = 4096);

/// y = w^H (sqrt(P_r) h + n), n ~ CN(0, sigma2 I) drawn from `seed`. Requires ||w|| = 1 within 1e-9.
std::complex<double> received_signal(const Eigen::VectorXcd &w, const Eigen::VectorXcd &h, const NoiseModel &noise,
                                     std::uint64_t seed);

struct FrameChannelInfo {
    std::size_t path_count = 0;   // at the reference antenna
    double rms_delay_spread = 0.0; // seconds, reference antenna
    bool los = false;
};

struct ChannelStats {
    double mean_path_count = 0.0;
    double mean_rms_delay_spread = 0.0;
    double los_fraction = 0.0;
    std::size_t frames = 0;
};

FrameChannelInfo frame_channel_info(const PathSet &paths, std::size_t reference_antenna, bool los);

/// Arithmetic means over frames. Throws std::invalid_argument for an empty list.
ChannelStats channel_stats(const std::vector<FrameChannelInfo> &frames);

} // namespace nff
