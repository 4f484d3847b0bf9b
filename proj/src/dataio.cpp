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

#include "nff/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "nff/checksum.hpp"
#include "nff/rng.hpp"

namespace nff {

namespace fs = std::filesystem;
using Kind = DatasetError::Kind;

namespace {

constexpr char kCsiMagic[8] = {'N', 'F', 'C', 'S', 'I', 'T', 'N', 'S'};
constexpr char kCloudMagic[8] = {'N', 'F', 'P', 'C', 'L', 'O', 'U', 'D'};
constexpr std::size_t kCsiHeaderBytes = 32;
constexpr std::size_t kCloudHeaderBytes = 16;

void put_u32(std::string &out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string &out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string &out, double v) { put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

std::uint32_t get_u32(std::string_view b, std::size_t at)
{
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
        v = (v << 8) | static_cast<unsigned char>(b[at + static_cast<std::size_t>(i)]);
    return v;
}

std::uint64_t get_u64(std::string_view b, std::size_t at)
{
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
        v = (v << 8) | static_cast<unsigned char>(b[at + static_cast<std::size_t>(i)]);
    return v;
}

float get_f32(std::string_view b, std::size_t at) { return std::bit_cast<float>(get_u32(b, at)); }

nlohmann::json vec_json(const Vec3 &v) { return {v.x, v.y, v.z}; }

Vec3 vec_from(const nlohmann::json &j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

struct PgmImage {
    int width = 0, height = 0, maxval = 0;
    std::string_view data;
};

PgmImage parse_pgm(std::string_view b, const std::string &where)
{
    PgmImage img;
    std::size_t pos = 0;
    auto token = [&]() -> std::string {
        while (pos < b.size() && std::isspace(static_cast<unsigned char>(b[pos])))
            ++pos;
        const std::size_t start = pos;
        while (pos < b.size() && !std::isspace(static_cast<unsigned char>(b[pos])))
            ++pos;
        return std::string(b.substr(start, pos - start));
    };
    try {
        if (token() != "P5")
            throw DatasetError(Kind::ShapeMismatch, where, "not a binary PGM");
        img.width = std::stoi(token());
        img.height = std::stoi(token());
        img.maxval = std::stoi(token());
    } catch (const std::logic_error &) {
        throw DatasetError(Kind::ShapeMismatch, where, "malformed PGM header");
    }
    ++pos; // single whitespace after maxval
    const std::size_t bpp = img.maxval > 255 ? 2 : 1;
    const std::size_t need = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height) * bpp;
    if (img.width < 1 || img.height < 1 || pos > b.size() || b.size() - pos != need)
        throw DatasetError(Kind::ShapeMismatch, where, "PGM payload does not match its header");
    img.data = b.substr(pos);
    return img;
}

std::string pgm_header(int w, int h, int maxval)
{
    return "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n" + std::to_string(maxval) + "\n";
}

std::string cloud_name(int frame)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "cloud_%04d.bin", frame);
    return buf;
}

std::string depth_name(int frame)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "depth_%04d.pgm", frame);
    return buf;
}

std::string semantic_name(int frame)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "semantic_%04d.pgm", frame);
    return buf;
}

FileEntry write_entry(const fs::path &root, const std::string &rel, const std::string &bytes)
{
    write_text_file(root / rel, bytes);
    return {rel, bytes.size(), fnv1a64(bytes)};
}

bool near_equal(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::max(std::abs(a), std::abs(b))); }

} // namespace

DatasetError::DatasetError(Kind kind, std::string path, const std::string &message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + (path.empty() ? "" : path + ": ") + message),
      kind_(kind), path_(std::move(path))
{
}

std::string_view to_string(DatasetError::Kind kind)
{
    switch (kind) {
    case Kind::VersionMismatch: return "version-mismatch";
    case Kind::ChecksumMismatch: return "checksum-mismatch";
    case Kind::DanglingReference: return "dangling-reference";
    case Kind::ShapeMismatch: return "shape-mismatch";
    case Kind::MissingModality: return "missing-modality";
    case Kind::Integrity: return "integrity";
    case Kind::Io: return "io";
    case Kind::Parse: return "parse";
    }
    return "unknown";
}

std::string encode_csi(const CsiTensor &csi)
{
    const std::size_t n = static_cast<std::size_t>(csi.m) * csi.k * csi.t * 2;
    if (csi.data.size() != n)
        throw DatasetError(Kind::ShapeMismatch, "", "CSI buffer length does not match M x K x T x 2");
    std::string out(kCsiMagic, sizeof kCsiMagic);
    out.reserve(kCsiHeaderBytes + 4 * n);
    put_u32(out, static_cast<std::uint32_t>(kFormatVersion));
    put_u32(out, static_cast<std::uint32_t>(csi.m));
    put_u32(out, static_cast<std::uint32_t>(csi.k));
    put_u32(out, static_cast<std::uint32_t>(csi.t));
    put_u64(out, 0);
    for (double v : csi.data)
        put_f32(out, v);
    return out;
}

CsiTensor decode_csi(std::string_view b, const std::string &where)
{
    if (b.size() < kCsiHeaderBytes)
        throw DatasetError(Kind::ShapeMismatch, where, "CSI file shorter than its 32-byte header");
    if (std::memcmp(b.data(), kCsiMagic, sizeof kCsiMagic) != 0)
        throw DatasetError(Kind::ShapeMismatch, where, "bad CSI magic");
    const std::uint32_t version = get_u32(b, 8);
    if (version != static_cast<std::uint32_t>(kFormatVersion))
        throw DatasetError(Kind::VersionMismatch, where,
                           "CSI version " + std::to_string(version) + ", reader supports " +
                               std::to_string(kFormatVersion));
    CsiTensor csi;
    csi.m = static_cast<int>(get_u32(b, 12));
    csi.k = static_cast<int>(get_u32(b, 16));
    csi.t = static_cast<int>(get_u32(b, 20));
    const std::size_t n = static_cast<std::size_t>(csi.m) * csi.k * csi.t * 2;
    if (b.size() != kCsiHeaderBytes + 4 * n)
        throw DatasetError(Kind::ShapeMismatch, where,
                           "CSI payload holds " + std::to_string(b.size() - kCsiHeaderBytes) + " bytes, header (M=" +
                               std::to_string(csi.m) + ", K=" + std::to_string(csi.k) + ", T=" +
                               std::to_string(csi.t) + ") requires " + std::to_string(4 * n));
    csi.data.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        csi.data[i] = get_f32(b, kCsiHeaderBytes + 4 * i);
    return csi;
}

std::string encode_cloud(const PointCloud &cloud)
{
    std::string out(kCloudMagic, sizeof kCloudMagic);
    put_u64(out, cloud.points.size());
    for (const Vec3 &p : cloud.points) {
        put_f32(out, p.x);
        put_f32(out, p.y);
        put_f32(out, p.z);
    }
    return out;
}

PointCloud decode_cloud(std::string_view b, const std::string &where)
{
    if (b.size() < kCloudHeaderBytes || std::memcmp(b.data(), kCloudMagic, sizeof kCloudMagic) != 0)
        throw DatasetError(Kind::ShapeMismatch, where, "bad point-cloud header");
    const std::uint64_t n = get_u64(b, 8);
    if (b.size() != kCloudHeaderBytes + 12 * n)
        throw DatasetError(Kind::ShapeMismatch, where, "point-cloud payload does not match N=" + std::to_string(n));
    PointCloud c;
    c.points.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t at = kCloudHeaderBytes + 12 * i;
        c.points[i] = {get_f32(b, at), get_f32(b, at + 4), get_f32(b, at + 8)};
    }
    return c;
}

std::string encode_depth_pgm(const SensorImage &img)
{
    std::string out = pgm_header(img.width, img.height, 65535);
    for (float d : img.depth) {
        const long q = std::lround(std::clamp(static_cast<double>(d) * kDepthUnitsPerMeter, 0.0, 65535.0));
        out.push_back(static_cast<char>((q >> 8) & 0xff));
        out.push_back(static_cast<char>(q & 0xff));
    }
    return out;
}

std::string encode_semantic_pgm(const SensorImage &img)
{
    std::string out = pgm_header(img.width, img.height, 255);
    out.append(reinterpret_cast<const char *>(img.semantic.data()), img.semantic.size());
    return out;
}

SensorImage decode_view(std::string_view depth_pgm, std::string_view semantic_pgm, const std::string &where)
{
    const PgmImage d = parse_pgm(depth_pgm, where + " (depth)");
    const PgmImage s = parse_pgm(semantic_pgm, where + " (semantic)");
    if (d.maxval != 65535 || s.maxval != 255 || d.width != s.width || d.height != s.height)
        throw DatasetError(Kind::ShapeMismatch, where, "depth and semantic planes disagree");
    SensorImage img;
    img.width = d.width;
    img.height = d.height;
    const std::size_t n = static_cast<std::size_t>(d.width) * d.height;
    img.depth.resize(n);
    img.semantic.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned hi = static_cast<unsigned char>(d.data[2 * i]);
        const unsigned lo = static_cast<unsigned char>(d.data[2 * i + 1]);
        img.depth[i] = static_cast<float>(((hi << 8) | lo) / kDepthUnitsPerMeter);
        img.semantic[i] = static_cast<std::uint8_t>(s.data[i]);
    }
    return img;
}

bool FrameRecord::operator==(const FrameRecord &o) const
{
    bool beams = beam_valid == o.beam_valid;
    if (beams && beam_valid)
        beams = beam.top_global == o.beam.top_global && beam.top_tuples == o.beam.top_tuples &&
                beam.top_gains == o.beam.top_gains && beam.top1_rate == o.beam.top1_rate;
    return beams && index == o.index && t == o.t && gt_pos == o.gt_pos && gt_vel == o.gt_vel &&
           gps.u_tilde == o.gps.u_tilde && gps.sigma2_gps == o.gps.sigma2_gps && los == o.los &&
           path_count == o.path_count && rms_delay_spread == o.rms_delay_spread;
}

nlohmann::json to_json(const FrameRecord &f, int mode_id)
{
    nlohmann::json j;
    j["frame"] = f.index;
    j["t"] = f.t;
    j["los"] = f.los;
    j["beam_valid"] = f.beam_valid;
    nlohmann::json g = nlohmann::json::array(), tu = nlohmann::json::array(), ga = nlohmann::json::array();
    if (f.beam_valid)
        for (std::size_t i = 0; i < kTopBeams; ++i) {
            g.push_back(f.beam.top_global[i]);
            const auto &t = f.beam.top_tuples[i];
            tu.push_back({t.k_theta, t.k_phi, t.k_r});
            ga.push_back(f.beam.top_gains[i]);
        }
    j["top5_global"] = g;
    j["top5_tuples"] = tu;
    j["top5_gains"] = ga;
    j["top1_rate"] = f.beam_valid ? nlohmann::json(f.beam.top1_rate) : nlohmann::json(nullptr);
    j["gps"] = vec_json(f.gps.u_tilde);
    j["gps_sigma2"] = f.gps.sigma2_gps;
    j["gt_pos"] = vec_json(f.gt_pos);
    j["gt_vel"] = vec_json(f.gt_vel);
    j["mode_id"] = mode_id;
    j["path_count"] = f.path_count;
    j["rms_delay_spread_s"] = f.rms_delay_spread;
    return j;
}

FrameRecord frame_from_json(const nlohmann::json &j)
{
    FrameRecord f;
    f.index = j.at("frame").get<int>();
    f.t = j.at("t").get<double>();
    f.los = j.at("los").get<bool>();
    f.beam_valid = j.at("beam_valid").get<bool>();
    if (f.beam_valid) {
        const auto &g = j.at("top5_global");
        const auto &tu = j.at("top5_tuples");
        const auto &ga = j.at("top5_gains");
        if (g.size() != kTopBeams || tu.size() != kTopBeams || ga.size() != kTopBeams)
            throw std::invalid_argument("beam label must carry exactly 5 entries");
        for (std::size_t i = 0; i < kTopBeams; ++i) {
            f.beam.top_global[i] = g.at(i).get<int>();
            f.beam.top_tuples[i] = {tu.at(i).at(0).get<int>(), tu.at(i).at(1).get<int>(), tu.at(i).at(2).get<int>()};
            f.beam.top_gains[i] = ga.at(i).get<double>();
        }
        f.beam.top1_rate = j.at("top1_rate").get<double>();
    }
    f.beam.los = f.los;
    f.gps.u_tilde = vec_from(j.at("gps"));
    f.gps.sigma2_gps = j.at("gps_sigma2").get<double>();
    f.gt_pos = vec_from(j.at("gt_pos"));
    f.gt_vel = vec_from(j.at("gt_vel"));
    f.path_count = j.at("path_count").get<std::size_t>();
    f.rms_delay_spread = j.at("rms_delay_spread_s").get<double>();
    return f;
}

nlohmann::json to_json(const TrajectoryEntry &e)
{
    nlohmann::json files = nlohmann::json::array();
    for (const auto &f : e.files)
        files.push_back({{"path", f.path}, {"bytes", f.bytes}, {"fnv1a64", to_hex(f.fnv1a64)}});
    const TrajectoryMode &m = mode_by_id(e.mode_id);
    return {{"id", e.id},
            {"city", e.city},
            {"index", e.index},
            {"split", e.split},
            {"mode_id", e.mode_id},
            {"mode", std::string(m.label())},
            {"difficulty", std::string(to_string(m.difficulty))},
            {"seed", e.seed},
            {"frames", e.frames},
            {"los_count", e.los_count},
            {"files", files}};
}

TrajectoryEntry trajectory_entry_from_json(const nlohmann::json &j)
{
    TrajectoryEntry e;
    e.id = j.at("id").get<std::string>();
    e.city = j.at("city").get<int>();
    e.index = j.at("index").get<int>();
    e.split = j.at("split").get<std::string>();
    e.mode_id = j.at("mode_id").get<int>();
    e.seed = j.at("seed").get<std::uint64_t>();
    e.frames = j.at("frames").get<int>();
    e.los_count = j.at("los_count").get<int>();
    for (const auto &f : j.at("files"))
        e.files.push_back({f.at("path").get<std::string>(), f.at("bytes").get<std::uint64_t>(),
                           from_hex(f.at("fnv1a64").get<std::string>())});
    return e;
}

std::string trajectory_id(int city, int index)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "city%03d_traj%04d", city, index);
    return buf;
}

std::string trajectory_dir(const std::string &id) { return "trajectories/" + id; }

TrajectoryEntry write_trajectory(const fs::path &root, const TrajectoryRecord &rec, const std::string &split)
{
    const int t = static_cast<int>(rec.frames.size());
    std::vector<std::string> gaps;
    if (t == 0)
        gaps.push_back("labels (no frames)");
    if (rec.csi.t != t)
        gaps.push_back("csi has " + std::to_string(rec.csi.t) + " of " + std::to_string(t) + " frames");
    if (static_cast<int>(rec.clouds.size()) != t)
        gaps.push_back("clouds: " + std::to_string(rec.clouds.size()) + " of " + std::to_string(t));
    if (static_cast<int>(rec.views.size()) != t)
        gaps.push_back("views: " + std::to_string(rec.views.size()) + " of " + std::to_string(t));
    for (int i = 0; i < t; ++i)
        if (rec.frames[static_cast<std::size_t>(i)].index != i)
            gaps.push_back("label frame " + std::to_string(i) + " carries index " +
                           std::to_string(rec.frames[static_cast<std::size_t>(i)].index));
    if (!gaps.empty()) {
        std::string msg = "refusing to write trajectory with missing modalities:";
        for (const auto &g : gaps)
            msg += " [" + g + "]";
        throw DatasetError(Kind::MissingModality, rec.id, msg);
    }

    const std::string dir = trajectory_dir(rec.id);
    fs::create_directories(root / dir);
    TrajectoryEntry e;
    e.id = rec.id;
    e.city = rec.city;
    e.index = rec.index;
    e.split = split;
    e.mode_id = rec.mode.id;
    e.seed = rec.seed;
    e.frames = t;
    for (const auto &f : rec.frames)
        e.los_count += f.los ? 1 : 0;

    e.files.push_back(write_entry(root, dir + "/csi.bin", encode_csi(rec.csi)));
    nlohmann::json labels;
    labels["trajectory"] = rec.id;
    labels["city"] = rec.city;
    labels["mode_id"] = rec.mode.id;
    labels["mode"] = std::string(rec.mode.label());
    labels["difficulty"] = std::string(to_string(rec.mode.difficulty));
    labels["seed"] = rec.seed;
    labels["dt"] = rec.dt;
    labels["frames"] = nlohmann::json::array();
    for (const auto &f : rec.frames)
        labels["frames"].push_back(to_json(f, rec.mode.id));
    e.files.push_back(write_entry(root, dir + "/labels.json", labels.dump(1) + "\n"));
    for (int i = 0; i < t; ++i) {
        const auto fi = static_cast<std::size_t>(i);
        e.files.push_back(write_entry(root, dir + "/" + cloud_name(i), encode_cloud(rec.clouds[fi])));
        e.files.push_back(write_entry(root, dir + "/" + depth_name(i), encode_depth_pgm(rec.views[fi])));
        e.files.push_back(write_entry(root, dir + "/" + semantic_name(i), encode_semantic_pgm(rec.views[fi])));
    }
    return e;
}

std::string SplitAssignment::split_of(int city) const
{
    auto has = [city](const std::vector<int> &v) { return std::find(v.begin(), v.end(), city) != v.end(); };
    if (has(train))
        return "train";
    if (has(val))
        return "val";
    if (has(test))
        return "test";
    throw std::out_of_range("city " + std::to_string(city) + " is not assigned to a split");
}

SplitAssignment split_by_city(const std::vector<int> &cities, const std::array<double, 3> &ratios, std::uint64_t seed)
{
    const std::set<int> unique(cities.begin(), cities.end());
    if (unique.size() != cities.size())
        throw std::invalid_argument("split_by_city: duplicate city ids");
    const std::size_t n = cities.size();
    if (n < 3)
        throw std::invalid_argument("split_by_city: need at least 3 cities for train/val/test, got " +
                                    std::to_string(n));
    for (double r : ratios)
        if (!(r > 0.0))
            throw std::invalid_argument("split_by_city: ratios must be positive");
    const double sum = ratios[0] + ratios[1] + ratios[2];
    auto share = [&](double r) {
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(n) * r / sum)));
    };
    std::size_t n_val = share(ratios[1]);
    std::size_t n_test = share(ratios[2]);
    while (n_val + n_test > n - 1) {
        if (n_val >= n_test && n_val > 1)
            --n_val;
        else if (n_test > 1)
            --n_test;
        else
            break;
    }
    std::vector<int> order(cities.begin(), cities.end());
    std::sort(order.begin(), order.end());
    Rng rng(derive_seed(seed, {0x73706c6974ULL}));
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.uniform_index(i)]);
    SplitAssignment s;
    s.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test),
                 order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
    s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), order.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

void StatisticsAccumulator::add_trajectory(const std::string &split, const std::vector<FrameRecord> &frames)
{
    SplitCounts &c = s_.splits[split];
    ++c.trajectories;
    ++s_.trajectories;
    for (const auto &f : frames) {
        ++c.samples;
        ++s_.samples;
        (f.los ? c.los : c.nlos) += 1;
        path_sum_ += static_cast<double>(f.path_count);
        rms_sum_ += f.rms_delay_spread;
    }
}

DatasetStatistics StatisticsAccumulator::finish() const
{
    DatasetStatistics s = s_;
    for (const char *name : {"train", "val", "test"})
        s.splits[name];
    if (s.samples > 0) {
        const double n = static_cast<double>(s.samples);
        std::size_t los = 0;
        for (const auto &[_, c] : s.splits)
            los += c.los;
        s.mean_path_count = path_sum_ / n;
        s.mean_rms_delay_spread_s = rms_sum_ / n;
        s.los_fraction = static_cast<double>(los) / n;
    }
    return s;
}

nlohmann::json DatasetStatistics::to_json() const
{
    nlohmann::json sp = nlohmann::json::object();
    for (const auto &[name, c] : splits)
        sp[name] = {{"samples", c.samples}, {"trajectories", c.trajectories}, {"los", c.los}, {"nlos", c.nlos}};
    return {{"samples", samples},
            {"trajectories", trajectories},
            {"splits", sp},
            {"mean_path_count", mean_path_count},
            {"mean_rms_delay_spread_s", mean_rms_delay_spread_s},
            {"los_fraction", los_fraction}};
}

void write_text_file(const fs::path &path, std::string_view contents)
{
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw DatasetError(Kind::Io, path.string(), "cannot open for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out)
            throw DatasetError(Kind::Io, path.string(), "write failed");
    }
    fs::rename(tmp, path);
}

std::string read_binary_file(const fs::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DatasetError(Kind::DanglingReference, path.string(), "file is missing or unreadable");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_manifest(const fs::path &root, const nlohmann::json &parameters, const nlohmann::json &config,
                    const SplitAssignment &splits, const std::vector<TrajectoryEntry> &entries,
                    const DatasetStatistics &stats)
{
    nlohmann::json m;
    m["format"] = "nearfield-forge";
    m["format_version"] = kFormatVersion;
    m["parameters"] = parameters;
    m["config"] = config;
    m["splits"] = {{"train", splits.train}, {"val", splits.val}, {"test", splits.test}};
    m["trajectories"] = nlohmann::json::array();
    for (const auto &e : entries)
        m["trajectories"].push_back(to_json(e));
    m["statistics"] = stats.to_json();
    write_text_file(root / "manifest.json", m.dump(1) + "\n");
}

DatasetReader::DatasetReader(const fs::path &root) : root_(root)
{
    const fs::path mpath = root / "manifest.json";
    const std::string text = read_binary_file(mpath);
    try {
        manifest_ = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
        throw DatasetError(Kind::Parse, mpath.string(), e.what());
    }
    try {
        const int version = manifest_.at("format_version").get<int>();
        if (version != kFormatVersion)
            throw DatasetError(Kind::VersionMismatch, mpath.string(),
                               "dataset format_version " + std::to_string(version) + ", reader supports " +
                                   std::to_string(kFormatVersion));
        const auto &p = manifest_.at("parameters");
        m_ = p.at("array").at("m_y").get<int>() * p.at("array").at("m_z").get<int>();
        k_ = p.at("carrier").at("subcarriers").get<int>();
        t_ = p.at("frames").get<int>();
        grid_ = polar_grid_from_json(p.at("codebook"));
        fov_deg_ = p.at("sensors").at("fov_deg").get<double>();
        camera_ = vec_from(p.at("bs_position"));
        const auto &s = manifest_.at("splits");
        splits_.train = s.at("train").get<std::vector<int>>();
        splits_.val = s.at("val").get<std::vector<int>>();
        splits_.test = s.at("test").get<std::vector<int>>();
        for (const auto &e : manifest_.at("trajectories"))
            entries_.push_back(trajectory_entry_from_json(e));
    } catch (const nlohmann::json::exception &e) {
        throw DatasetError(Kind::Parse, mpath.string(), e.what());
    }
}

std::vector<const TrajectoryEntry *> DatasetReader::trajectories_in(const std::string &split) const
{
    std::vector<const TrajectoryEntry *> out;
    for (const auto &e : entries_)
        if (split.empty() || e.split == split)
            out.push_back(&e);
    return out;
}

std::string DatasetReader::load_file(const TrajectoryEntry &entry, const std::string &name, bool verify) const
{
    const std::string rel = trajectory_dir(entry.id) + "/" + name;
    const auto it = std::find_if(entry.files.begin(), entry.files.end(), [&](const FileEntry &f) { return f.path == rel; });
    if (it == entry.files.end())
        throw DatasetError(Kind::DanglingReference, rel, "not listed in the manifest for " + entry.id);
    if (!fs::exists(root_ / rel))
        throw DatasetError(Kind::DanglingReference, rel, "referenced by " + entry.id + " but missing on disk");
    std::string bytes = read_binary_file(root_ / rel);
    if (verify && bytes.size() == it->bytes && fnv1a64(bytes) != it->fnv1a64)
        throw DatasetError(Kind::ChecksumMismatch, rel,
                           "digest " + to_hex(fnv1a64(bytes)) + " != manifest " + to_hex(it->fnv1a64));
    return bytes;
}

CsiTensor DatasetReader::load_csi(const TrajectoryEntry &entry, bool verify) const
{
    const std::string rel = trajectory_dir(entry.id) + "/csi.bin";
    const std::string bytes = load_file(entry, "csi.bin", false);
    CsiTensor csi;
    try {
        csi = decode_csi(bytes, rel);
    } catch (const DatasetError &e) {
        if (e.kind() == Kind::ShapeMismatch)
            throw DatasetError(Kind::ShapeMismatch, rel, "trajectory " + entry.id + ": " + e.what());
        throw;
    }
    if (csi.m != m_ || csi.k != k_ || csi.t != entry.frames)
        throw DatasetError(Kind::ShapeMismatch, rel,
                           "trajectory " + entry.id + ": CSI shape (" + std::to_string(csi.m) + ", " +
                               std::to_string(csi.k) + ", " + std::to_string(csi.t) + ") != manifest (" +
                               std::to_string(m_) + ", " + std::to_string(k_) + ", " + std::to_string(entry.frames) +
                               ")");
    if (verify)
        load_file(entry, "csi.bin", true);
    const auto &p = parameters().at("carrier");
    csi.f_c = p.at("f_c_hz").get<double>();
    csi.delta_f = p.at("delta_f_hz").get<double>();
    return csi;
}

std::vector<FrameRecord> DatasetReader::load_labels(const TrajectoryEntry &entry, bool verify) const
{
    const std::string rel = trajectory_dir(entry.id) + "/labels.json";
    const std::string bytes = load_file(entry, "labels.json", verify);
    std::vector<FrameRecord> frames;
    try {
        const auto j = nlohmann::json::parse(bytes);
        for (const auto &f : j.at("frames"))
            frames.push_back(frame_from_json(f));
    } catch (const nlohmann::json::exception &e) {
        throw DatasetError(Kind::Parse, rel, e.what());
    } catch (const std::invalid_argument &e) {
        throw DatasetError(Kind::Parse, rel, e.what());
    }
    if (static_cast<int>(frames.size()) != entry.frames)
        throw DatasetError(Kind::ShapeMismatch, rel,
                           "trajectory " + entry.id + ": " + std::to_string(frames.size()) + " labeled frames, manifest declares " +
                               std::to_string(entry.frames));
    for (std::size_t i = 0; i < frames.size(); ++i)
        if (frames[i].index != static_cast<int>(i))
            throw DatasetError(Kind::ShapeMismatch, rel, "frame indices are not contiguous");
    return frames;
}

PointCloud DatasetReader::load_cloud(const TrajectoryEntry &entry, int frame, bool verify) const
{
    return decode_cloud(load_file(entry, cloud_name(frame), verify), trajectory_dir(entry.id) + "/" + cloud_name(frame));
}

SensorImage DatasetReader::load_view(const TrajectoryEntry &entry, int frame, bool verify) const
{
    SensorImage img = decode_view(load_file(entry, depth_name(frame), verify),
                                  load_file(entry, semantic_name(frame), verify),
                                  trajectory_dir(entry.id) + "/" + depth_name(frame));
    img.fov_deg = fov_deg_;
    img.position = camera_;
    return img;
}

TrajectoryRecord DatasetReader::load_trajectory(const TrajectoryEntry &entry, bool with_sensors, bool verify) const
{
    TrajectoryRecord rec;
    rec.id = entry.id;
    rec.city = entry.city;
    rec.index = entry.index;
    rec.mode = mode_by_id(entry.mode_id);
    rec.seed = entry.seed;
    rec.csi = load_csi(entry, verify);
    rec.frames = load_labels(entry, verify);
    const std::string labels = load_file(entry, "labels.json", false);
    rec.dt = nlohmann::json::parse(labels).at("dt").get<double>();
    if (with_sensors)
        for (int i = 0; i < entry.frames; ++i) {
            rec.clouds.push_back(load_cloud(entry, i, verify));
            rec.views.push_back(load_view(entry, i, verify));
        }
    return rec;
}

SampleStream DatasetReader::samples(const std::string &split, bool with_sensors) const
{
    return SampleStream(*this, trajectories_in(split), with_sensors);
}

IntegrityReport DatasetReader::verify() const
{
    IntegrityReport rep;
    std::set<int> seen;
    for (const auto &group : {splits_.train, splits_.val, splits_.test})
        for (int c : group)
            if (!seen.insert(c).second)
                rep.problems.push_back({Kind::Integrity, "manifest.json", "city " + std::to_string(c) + " appears in more than one split"});
    for (const auto &e : entries_) {
        try {
            if (splits_.split_of(e.city) != e.split)
                rep.problems.push_back({Kind::Integrity, trajectory_dir(e.id), "split does not match its city"});
        } catch (const std::out_of_range &) {
            rep.problems.push_back({Kind::Integrity, trajectory_dir(e.id), "city missing from split assignment"});
        }
        for (const auto &f : e.files) {
            ++rep.files_checked;
            const fs::path p = root_ / f.path;
            if (!fs::exists(p)) {
                rep.problems.push_back({Kind::DanglingReference, f.path, "missing on disk"});
                continue;
            }
            const std::uint64_t size = fs::file_size(p);
            if (size != f.bytes) {
                rep.problems.push_back({Kind::ShapeMismatch, f.path,
                                        std::to_string(size) + " bytes on disk, manifest declares " + std::to_string(f.bytes)});
                continue;
            }
            const std::uint64_t h = fnv1a64_file(p);
            if (h != f.fnv1a64)
                rep.problems.push_back({Kind::ChecksumMismatch, f.path, "digest " + to_hex(h) + " != manifest " + to_hex(f.fnv1a64)});
        }
        try {
            load_csi(e, false);
        } catch (const DatasetError &err) {
            if (err.kind() != Kind::DanglingReference)
                rep.problems.push_back({err.kind(), err.path(), err.what()});
        }
        if (static_cast<std::size_t>(e.frames) * 3 + 2 != e.files.size())
            rep.problems.push_back({Kind::MissingModality, trajectory_dir(e.id), "file list does not cover every frame"});
    }
    return rep;
}

SampleStream::SampleStream(const DatasetReader &reader, std::vector<const TrajectoryEntry *> entries, bool with_sensors)
    : reader_(reader), entries_(std::move(entries)), with_sensors_(with_sensors)
{
}

std::optional<SampleRecord> SampleStream::next()
{
    while (traj_ < entries_.size()) {
        const TrajectoryEntry &e = *entries_[traj_];
        if (!csi_) {
            csi_ = reader_.load_csi(e);
            labels_ = reader_.load_labels(e);
            frame_ = 0;
        }
        if (frame_ >= e.frames) {
            csi_.reset();
            ++traj_;
            continue;
        }
        SampleRecord s;
        s.trajectory = e.id;
        s.city = e.city;
        s.split = e.split;
        s.mode = mode_by_id(e.mode_id);
        s.frame = frame_;
        s.csi = csi_->frame(frame_);
        s.label = labels_[static_cast<std::size_t>(frame_)];
        if (with_sensors_) {
            s.cloud = reader_.load_cloud(e, frame_);
            s.view = reader_.load_view(e, frame_);
        }
        ++frame_;
        return s;
    }
    return std::nullopt;
}

DatasetStatistics dataset_report(const fs::path &root)
{
    const DatasetReader reader(root);
    StatisticsAccumulator acc;
    for (const auto &e : reader.trajectories()) {
        const auto frames = reader.load_labels(e);
        int los = 0;
        for (const auto &f : frames)
            los += f.los ? 1 : 0;
        if (los != e.los_count)
            throw DatasetError(Kind::Integrity, trajectory_dir(e.id),
                               "labels hold " + std::to_string(los) + " LoS frames, manifest declares " +
                                   std::to_string(e.los_count));
        acc.add_trajectory(e.split, frames);
    }
    const DatasetStatistics s = acc.finish();
    const auto &m = reader.manifest().at("statistics");
    auto mismatch = [](const std::string &what) {
        throw DatasetError(Kind::Integrity, "manifest.json", "statistics disagree with records: " + what);
    };
    if (m.at("samples").get<std::size_t>() != s.samples)
        mismatch("samples");
    if (m.at("trajectories").get<std::size_t>() != s.trajectories)
        mismatch("trajectories");
    for (const auto &[name, c] : s.splits) {
        const auto &mc = m.at("splits").at(name);
        if (mc.at("samples").get<std::size_t>() != c.samples || mc.at("los").get<std::size_t>() != c.los ||
            mc.at("nlos").get<std::size_t>() != c.nlos || mc.at("trajectories").get<std::size_t>() != c.trajectories)
            mismatch("split " + name);
    }
    if (!near_equal(m.at("mean_path_count").get<double>(), s.mean_path_count))
        mismatch("mean_path_count");
    if (!near_equal(m.at("mean_rms_delay_spread_s").get<double>(), s.mean_rms_delay_spread_s))
        mismatch("mean_rms_delay_spread_s");
    if (!near_equal(m.at("los_fraction").get<double>(), s.los_fraction))
        mismatch("los_fraction");
    return s;
}

} // namespace nff
