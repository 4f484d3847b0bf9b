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

#include "nff/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "nff/constants.hpp"
#include "nff/errors.hpp"
#include "nff/rng.hpp"

namespace nff {

std::vector<double> subcarrier_frequencies(double f_c, double delta_f, int k_count)
{
    if (k_count < 1)
        throw std::invalid_argument("subcarrier_frequencies: K must be >= 1");
    if (f_c <= 0.0 || delta_f < 0.0)
        throw std::invalid_argument("subcarrier_frequencies: invalid carrier or spacing");
    std::vector<double> f(static_cast<std::size_t>(k_count));
    for (int k = 0; k < k_count; ++k)
        f[static_cast<std::size_t>(k)] = f_c + (k - 0.5 * (k_count - 1)) * delta_f;
    return f;
}

std::size_t center_subcarrier(int k_count)
{
    if (k_count < 1)
        throw std::invalid_argument("center_subcarrier: K must be >= 1");
    return static_cast<std::size_t>((k_count - 1) / 2);
}

std::complex<double> propagation_phasor(double frequency_hz, double length_m)
{
    double cycles = frequency_hz * length_m / kSpeedOfLight;
    cycles -= std::nearbyint(cycles);
    const double phase = -2.0 * kPi * cycles;
    return {std::cos(phase), std::sin(phase)};
}

Eigen::MatrixXcd assemble_channel(const PathSet &paths, const std::vector<double> &frequencies)
{
    if (frequencies.empty())
        throw std::invalid_argument("assemble_channel: no frequencies");
    for (double f : frequencies)
        if (f < 6e9 * (1.0 - 1e-9) || f > 24e9 * (1.0 + 1e-9))
            throw std::invalid_argument("assemble_channel: frequency outside [6, 24] GHz");
    const auto m_count = static_cast<Eigen::Index>(paths.antennas());
    const auto k_count = static_cast<Eigen::Index>(frequencies.size());
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m_count, k_count);
    for (Eigen::Index m = 0; m < m_count; ++m)
        for (const Path &p : paths.per_antenna[static_cast<std::size_t>(m)])
            for (Eigen::Index k = 0; k < k_count; ++k)
                h(m, k) += p.gain * propagation_phasor(frequencies[static_cast<std::size_t>(k)], p.length);
    return h;
}

Eigen::MatrixXcd CsiTensor::frame(int ti) const
{
    if (ti < 0 || ti >= t)
        throw IndexError("CsiTensor::frame: frame index out of range");
    Eigen::MatrixXcd out(m, k);
    for (int mi = 0; mi < m; ++mi)
        for (int ki = 0; ki < k; ++ki)
            out(mi, ki) = at(mi, ki, ti);
    return out;
}

Eigen::VectorXcd CsiTensor::column(int ki, int ti) const
{
    if (ti < 0 || ti >= t || ki < 0 || ki >= k)
        throw IndexError("CsiTensor::column: index out of range");
    Eigen::VectorXcd out(m);
    for (int mi = 0; mi < m; ++mi)
        out(mi) = at(mi, ki, ti);
    return out;
}

double CsiTensor::squared_norm() const
{
    double s = 0.0;
    for (double v : data)
        s += v * v;
    return s;
}

bool CsiTensor::all_finite() const
{
    for (double v : data)
        if (!std::isfinite(v))
            return false;
    return true;
}

CsiTensor stack_frames(const std::vector<Eigen::MatrixXcd> &frames, double f_c, double delta_f)
{
    if (frames.empty())
        throw std::invalid_argument("stack_frames: T must be >= 1");
    CsiTensor csi;
    csi.m = static_cast<int>(frames.front().rows());
    csi.k = static_cast<int>(frames.front().cols());
    csi.t = static_cast<int>(frames.size());
    csi.f_c = f_c;
    csi.delta_f = delta_f;
    csi.data.assign(static_cast<std::size_t>(csi.m) * static_cast<std::size_t>(csi.k) * static_cast<std::size_t>(csi.t) * 2,
                    0.0);
    for (int ti = 0; ti < csi.t; ++ti) {
        const auto &f = frames[static_cast<std::size_t>(ti)];
        if (f.rows() != csi.m || f.cols() != csi.k)
            throw ShapeMismatch("stack_frames: frame " + std::to_string(ti) + " has shape " + std::to_string(f.rows()) +
                                "x" + std::to_string(f.cols()) + ", expected " + std::to_string(csi.m) + "x" +
                                std::to_string(csi.k));
        for (int mi = 0; mi < csi.m; ++mi)
            for (int ki = 0; ki < csi.k; ++ki)
                csi.set(mi, ki, ti, f(mi, ki));
    }
    return csi;
}

CsiTensor build_csi_tensor(const std::vector<PathSet> &trajectory_paths, const std::vector<double> &frequencies,
                           double f_c, double delta_f)
{
    if (trajectory_paths.empty())
        throw std::invalid_argument("build_csi_tensor: T must be >= 1");
    std::vector<Eigen::MatrixXcd> frames;
    frames.reserve(trajectory_paths.size());
    for (const auto &ps : trajectory_paths)
        frames.push_back(assemble_channel(ps, frequencies));
    return stack_frames(frames, f_c, delta_f);
}

double reference_receive_power(double f_c, double sigma2, double snr_db, double range_m, std::size_t m_ref)
{
    if (f_c <= 0.0 || sigma2 <= 0.0 || range_m <= 0.0 || m_ref == 0)
        throw std::invalid_argument("reference_receive_power: invalid arguments");
    const double g = wavelength(f_c) / (4.0 * kPi * range_m);
    const double matched = static_cast<double>(m_ref) * g * g;
    return std::pow(10.0, snr_db / 10.0) * sigma2 / matched;
}

std::complex<double> received_signal(const Eigen::VectorXcd &w, const Eigen::VectorXcd &h, const NoiseModel &noise,
                                     std::uint64_t seed)
{
    if (w.size() != h.size())
        throw ShapeMismatch("received_signal: w and h differ in length");
    if (std::abs(w.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("received_signal: beamformer must have unit norm");
    if (!(noise.sigma2 >= 0.0) || !(noise.p_r > 0.0))
        throw std::invalid_argument("received_signal: invalid noise model");
    Rng rng(seed);
    const double sd = std::sqrt(0.5 * noise.sigma2);
    Eigen::VectorXcd r = std::sqrt(noise.p_r) * h;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        const double re = rng.normal();
        const double im = rng.normal();
        r(i) += std::complex<double>(sd * re, sd * im);
    }
    return w.dot(r); // Eigen's dot conjugates the left operand
}

FrameChannelInfo frame_channel_info(const PathSet &paths, std::size_t reference_antenna, bool los)
{
    if (reference_antenna >= paths.antennas())
        throw IndexError("frame_channel_info: reference antenna out of range");
    FrameChannelInfo info;
    const auto &ref = paths.per_antenna[reference_antenna];
    info.path_count = ref.size();
    info.rms_delay_spread = ref.empty() ? 0.0 : rms_delay_spread(ref);
    info.los = los;
    return info;
}

ChannelStats channel_stats(const std::vector<FrameChannelInfo> &frames)
{
    if (frames.empty())
        throw std::invalid_argument("channel_stats: no frames");
    ChannelStats s;
    std::size_t los = 0;
    for (const auto &f : frames) {
        s.mean_path_count += static_cast<double>(f.path_count);
        s.mean_rms_delay_spread += f.rms_delay_spread;
        los += f.los ? 1 : 0;
    }
    const double n = static_cast<double>(frames.size());
    s.mean_path_count /= n;
    s.mean_rms_delay_spread /= n;
    s.los_fraction = static_cast<double>(los) / n;
    s.frames = frames.size();
    return s;
}

} // namespace nff
