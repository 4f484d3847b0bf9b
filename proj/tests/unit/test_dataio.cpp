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

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "nff/checksum.hpp"
#include "nff/dataio.hpp"
#include "nff/rng.hpp"

namespace fs = std::filesystem;
using nff::DatasetError;
using Kind = nff::DatasetError::Kind;
using nff::Vec3;

namespace {

constexpr int kM = 4, kK = 2, kT = 3;

fs::path fresh_dir(const std::string &name)
{
    const fs::path p = fs::temp_directory_path() / ("nff_dataio_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

nff::CsiTensor make_csi(nff::Rng &rng, int m, int k, int t)
{
    nff::CsiTensor c;
    c.m = m;
    c.k = k;
    c.t = t;
    c.data.resize(static_cast<std::size_t>(m) * k * t * 2);
    for (double &v : c.data)
        v = static_cast<float>(rng.normal()); // exactly representable in float32
    return c;
}

nff::FrameRecord make_frame(nff::Rng &rng, int i)
{
    nff::FrameRecord f;
    f.index = i;
    f.t = 0.1 * i;
    f.gt_pos = {rng.uniform(0, 100), rng.uniform(-50, 50), rng.uniform(10, 60)};
    f.gt_vel = {1.5, -0.25, 0.0};
    f.gps = {f.gt_pos + Vec3{0.5, -0.5, 0.25}, 1.0};
    f.los = i % 2 == 0;
    f.beam_valid = i != 2;
    if (f.beam_valid)
        for (std::size_t b = 0; b < nff::kTopBeams; ++b) {
            f.beam.top_global[b] = static_cast<int>(b) + 1;
            f.beam.top_tuples[b] = {1, 1, static_cast<int>(b) + 1};
            f.beam.top_gains[b] = 1.0 - 0.125 * static_cast<double>(b);
        }
    f.beam.top1_rate = f.beam_valid ? 7.25 : 0.0;
    f.beam.los = f.los;
    f.path_count = static_cast<std::size_t>(i) + 1;
    f.rms_delay_spread = 1e-9 * i;
    return f;
}

nff::SensorImage make_view(int w, int h)
{
    nff::SensorImage img;
    img.width = w;
    img.height = h;
    for (int i = 0; i < w * h; ++i) {
        img.depth.push_back(static_cast<float>(0.01 * (17 * i % 5000)));
        img.semantic.push_back(static_cast<std::uint8_t>(i % 5));
    }
    return img;
}

nff::TrajectoryRecord make_record(int city, int index, std::uint64_t seed)
{
    nff::Rng rng(seed);
    nff::TrajectoryRecord r;
    r.id = nff::trajectory_id(city, index);
    r.city = city;
    r.index = index;
    r.mode = nff::mode_by_id(1 + index % 10);
    r.seed = seed;
    r.csi = make_csi(rng, kM, kK, kT);
    for (int i = 0; i < kT; ++i) {
        r.frames.push_back(make_frame(rng, i));
        r.clouds.push_back({{{1.0, 2.0, 3.0}, {4.5, -1.25, 0.0}}});
        r.views.push_back(make_view(4, 3));
    }
    return r;
}

nlohmann::json parameters()
{
    nff::PolarGrid g;
    return {{"array", {{"m_y", 2}, {"m_z", 2}}},
            {"carrier", {{"f_c_hz", 7e9}, {"delta_f_hz", 30e3}, {"subcarriers", kK}}},
            {"frames", kT},
            {"codebook", nff::to_json(g)},
            {"sensors", {{"fov_deg", 90.0}}},
            {"bs_position", {0.0, 0.0, 65.0}}};
}

struct Built {
    fs::path root;
    std::vector<nff::TrajectoryRecord> records;
    nff::SplitAssignment splits;
    nff::DatasetStatistics stats;
};

Built build_dataset(const std::string &name)
{
    Built b;
    b.root = fresh_dir(name);
    b.splits = nff::split_by_city({0, 1, 2}, {22, 4, 4}, 7);
    std::vector<nff::TrajectoryEntry> entries;
    nff::StatisticsAccumulator acc;
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 2; ++i) {
            b.records.push_back(make_record(c, i, static_cast<std::uint64_t>(100 * c + i)));
            const std::string split = b.splits.split_of(c);
            entries.push_back(nff::write_trajectory(b.root, b.records.back(), split));
            acc.add_trajectory(split, b.records.back().frames);
        }
    b.stats = acc.finish();
    nff::write_manifest(b.root, parameters(), nlohmann::json::object(), b.splits, entries, b.stats);
    return b;
}

void overwrite(const fs::path &p, const std::string &bytes)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

template <class F> Kind kind_of(F &&f)
{
    try {
        f();
    } catch (const DatasetError &e) {
        return e.kind();
    }
    FAIL("no DatasetError raised");
    return Kind::Io;
}

const nff::TrajectoryEntry &entry_of(const nff::DatasetReader &r, const std::string &id)
{
    for (const auto &e : r.trajectories())
        if (e.id == id)
            return e;
    throw std::out_of_range(id);
}

} // namespace

TEST_CASE("CSI codec writes the documented byte layout", "[dataio]")
{
    nff::CsiTensor c;
    c.m = 1;
    c.k = 2;
    c.t = 1;
    c.data = {1.0, -2.0, 0.5, 0.25};
    const std::string b = nff::encode_csi(c);
    REQUIRE(b.size() == 32 + 16);
    CHECK(b.substr(0, 8) == "NFCSITNS");
    const std::uint32_t expect_hdr[4] = {1, 1, 2, 1};
    CHECK(std::memcmp(b.data() + 8, expect_hdr, 16) == 0);
    CHECK(std::all_of(b.begin() + 24, b.begin() + 32, [](char x) { return x == 0; }));
    const float expect_data[4] = {1.0f, -2.0f, 0.5f, 0.25f};
    CHECK(std::memcmp(b.data() + 32, expect_data, 16) == 0);

    const auto d = nff::decode_csi(b, "x");
    CHECK(d.m == 1);
    CHECK(d.k == 2);
    CHECK(d.t == 1);
    CHECK(d.data == c.data);
}

TEST_CASE("CSI decoding rejects malformed buffers", "[dataio]")
{
    nff::Rng rng(3);
    const std::string b = nff::encode_csi(make_csi(rng, 3, 2, 4));
    CHECK(kind_of([&] { nff::decode_csi(b.substr(0, 31), "f"); }) == Kind::ShapeMismatch);
    CHECK(kind_of([&] { nff::decode_csi(b.substr(0, b.size() - 4), "f"); }) == Kind::ShapeMismatch);
    std::string bad = b;
    bad[0] = 'X';
    CHECK(kind_of([&] { nff::decode_csi(bad, "f"); }) == Kind::ShapeMismatch);
    std::string v2 = b;
    v2[8] = 2;
    CHECK(kind_of([&] { nff::decode_csi(v2, "f"); }) == Kind::VersionMismatch);
    nff::CsiTensor wrong = make_csi(rng, 2, 2, 2);
    wrong.data.pop_back();
    CHECK(kind_of([&] { nff::encode_csi(wrong); }) == Kind::ShapeMismatch);
}

TEST_CASE("Point cloud and PGM codecs round-trip", "[dataio]")
{
    nff::PointCloud pc{{{1.0, -2.0, 3.5}, {0.0, 0.0, 0.0}, {120.25, -60.5, 7.75}}};
    const std::string b = nff::encode_cloud(pc);
    REQUIRE(b.size() == 16 + 36);
    CHECK(b.substr(0, 8) == "NFPCLOUD");
    const std::uint64_t n = 3;
    CHECK(std::memcmp(b.data() + 8, &n, 8) == 0);
    CHECK(nff::decode_cloud(b, "c").points == pc.points);
    CHECK(kind_of([&] { nff::decode_cloud(b.substr(0, b.size() - 1), "c"); }) == Kind::ShapeMismatch);
    CHECK(nff::decode_cloud(nff::encode_cloud({}), "c").points.empty());

    nff::SensorImage img;
    img.width = 2;
    img.height = 1;
    img.depth = {1.0f, 655.35f};
    img.semantic = {3, 4};
    const std::string depth = nff::encode_depth_pgm(img);
    CHECK(depth == std::string("P5\n2 1\n65535\n") + std::string("\x00\x64\xff\xff", 4));
    const std::string sem = nff::encode_semantic_pgm(img);
    CHECK(sem == std::string("P5\n2 1\n255\n\x03\x04"));
    const auto back = nff::decode_view(depth, sem, "v");
    CHECK(back.width == 2);
    CHECK(back.height == 1);
    CHECK(back.semantic == img.semantic);
    CHECK(back.depth[0] == Catch::Approx(1.0).margin(1e-6));
    CHECK(back.depth[1] == Catch::Approx(655.35).margin(1e-4));

    const auto big = make_view(5, 4);
    const auto rt = nff::decode_view(nff::encode_depth_pgm(big), nff::encode_semantic_pgm(big), "v");
    for (std::size_t i = 0; i < big.depth.size(); ++i)
        CHECK(std::abs(rt.depth[i] - big.depth[i]) <= 0.5 / nff::kDepthUnitsPerMeter + 1e-5);
    CHECK(rt.semantic == big.semantic);

    CHECK(kind_of([&] { nff::decode_view(depth.substr(0, depth.size() - 1), sem, "v"); }) == Kind::ShapeMismatch);
    CHECK(kind_of([&] { nff::decode_view("P2\n2 1\n255\n12", sem, "v"); }) == Kind::ShapeMismatch);
    CHECK(kind_of([&] { nff::decode_view(depth, "P5\n1 1\n255\n\x01", "v"); }) == Kind::ShapeMismatch);
}

TEST_CASE("Frame labels round-trip through JSON", "[dataio]")
{
    nff::Rng rng(11);
    for (int i = 0; i < kT; ++i) {
        const auto f = make_frame(rng, i);
        const auto j = nff::to_json(f, 4);
        CHECK(j.at("mode_id") == 4);
        CHECK(j.at("top5_global").size() == (f.beam_valid ? 5u : 0u));
        CHECK(nff::frame_from_json(j) == f);
    }
    auto j = nff::to_json(make_frame(rng, 0), 1);
    j["top5_gains"].erase(0);
    CHECK_THROWS_AS(nff::frame_from_json(j), std::invalid_argument);
}

TEST_CASE("City split sizes and determinism", "[dataio]")
{
    std::vector<int> thirty(30);
    std::iota(thirty.begin(), thirty.end(), 0);
    const auto s = nff::split_by_city(thirty, {22, 4, 4}, 1);
    CHECK(s.train.size() == 22);
    CHECK(s.val.size() == 4);
    CHECK(s.test.size() == 4);
    std::set<int> all;
    for (const auto *g : {&s.train, &s.val, &s.test})
        for (int c : *g)
            CHECK(all.insert(c).second);
    CHECK(all.size() == 30);
    CHECK(nff::split_by_city(thirty, {22, 4, 4}, 1) == s);
    CHECK_FALSE(nff::split_by_city(thirty, {22, 4, 4}, 2) == s);

    // Order of the input list does not matter.
    std::vector<int> rev(thirty.rbegin(), thirty.rend());
    CHECK(nff::split_by_city(rev, {22, 4, 4}, 1) == s);

    const auto five = nff::split_by_city({10, 11, 12, 13, 14}, {22, 4, 4}, 1);
    CHECK(five.train.size() == 3);
    CHECK(five.val.size() == 1);
    CHECK(five.test.size() == 1);
    const auto three = nff::split_by_city({0, 1, 2}, {1, 1, 1}, 1);
    CHECK(three.train.size() == 1);
    CHECK(three.split_of(three.val.front()) == "val");
    CHECK_THROWS_AS(three.split_of(9), std::out_of_range);

    CHECK_THROWS_AS(nff::split_by_city({0, 1}, {22, 4, 4}, 1), std::invalid_argument);
    CHECK_THROWS_AS(nff::split_by_city({0, 1, 1}, {22, 4, 4}, 1), std::invalid_argument);
    CHECK_THROWS_AS(nff::split_by_city({0, 1, 2}, {22, 0, 4}, 1), std::invalid_argument);
}

TEST_CASE("Written dataset reads back unchanged", "[dataio]")
{
    const Built b = build_dataset("roundtrip");
    const nff::DatasetReader reader(b.root);
    CHECK(reader.antennas() == kM);
    CHECK(reader.subcarriers() == kK);
    CHECK(reader.frames_per_trajectory() == kT);
    CHECK(reader.splits() == b.splits);
    REQUIRE(reader.trajectories().size() == 6);
    CHECK(reader.verify().ok());
    CHECK(reader.verify().files_checked == 6 * (2 + 3 * kT));

    for (const auto &rec : b.records) {
        const auto &e = entry_of(reader, rec.id);
        CHECK(e.split == b.splits.split_of(rec.city));
        CHECK(e.mode_id == rec.mode.id);
        const auto back = reader.load_trajectory(e);
        CHECK(back.csi.data == rec.csi.data);
        CHECK(back.csi.f_c == 7e9);
        CHECK(back.frames == rec.frames);
        CHECK(back.dt == rec.dt);
        REQUIRE(back.clouds.size() == static_cast<std::size_t>(kT));
        CHECK(back.clouds[1].points == rec.clouds[1].points);
        CHECK(back.views[2].semantic == rec.views[2].semantic);
        CHECK(back.views[2].fov_deg == 90.0);
        CHECK(back.views[2].position == Vec3{0, 0, 65});
        for (const auto &f : e.files)
            CHECK(f.fnv1a64 == nff::fnv1a64_file(b.root / f.path));
    }

    std::size_t n = 0;
    auto stream = reader.samples("", false);
    while (auto s = stream.next()) {
        const auto &rec = b.records[n / kT];
        CHECK(s->trajectory == rec.id);
        CHECK(s->frame == static_cast<int>(n % kT));
        CHECK(s->label == rec.frames[n % kT]);
        CHECK(s->csi.rows() == kM);
        CHECK(s->csi.cols() == kK);
        CHECK(s->csi(1, 1) == rec.csi.at(1, 1, s->frame));
        CHECK_FALSE(s->cloud);
        ++n;
    }
    CHECK(n == 6u * kT);
    auto test_stream = reader.samples("test", true);
    std::size_t n_test = 0;
    while (auto s = test_stream.next()) {
        CHECK(s->split == "test");
        CHECK(s->cloud);
        CHECK(s->view);
        ++n_test;
    }
    CHECK(n_test == b.splits.test.size() * 2 * kT);

    const auto stats = nff::dataset_report(b.root);
    CHECK(stats.samples == 18);
    CHECK(stats.mean_path_count == Catch::Approx(2.0));
    CHECK(stats.los_fraction == Catch::Approx(12.0 / 18.0));
    CHECK(stats.to_json() == b.stats.to_json());
}

TEST_CASE("Truncated CSI is reported as a shape mismatch naming the trajectory", "[dataio]")
{
    const Built b = build_dataset("truncated");
    const std::string id = b.records[3].id;
    const fs::path p = b.root / "trajectories" / id / "csi.bin";
    const std::string bytes = nff::read_binary_file(p);
    overwrite(p, bytes.substr(0, bytes.size() - 8));
    const nff::DatasetReader reader(b.root);
    try {
        reader.load_csi(entry_of(reader, id));
        FAIL("no error");
    } catch (const DatasetError &e) {
        CHECK(e.kind() == Kind::ShapeMismatch);
        CHECK(std::string(e.what()).find(id) != std::string::npos);
        CHECK(e.path().find("csi.bin") != std::string::npos);
    }
    const auto rep = reader.verify();
    CHECK_FALSE(rep.ok());
    CHECK(std::any_of(rep.problems.begin(), rep.problems.end(),
                      [](const auto &p) { return p.kind == Kind::ShapeMismatch; }));
}

TEST_CASE("Corrupted bytes are reported as checksum mismatches", "[dataio]")
{
    const Built b = build_dataset("corrupt");
    const std::string id = b.records[1].id;
    const fs::path p = b.root / "trajectories" / id / "labels.json";
    std::string bytes = nff::read_binary_file(p);
    const std::size_t at = bytes.find("7.25");
    REQUIRE(at != std::string::npos);
    bytes[at] = '8';
    overwrite(p, bytes);
    const nff::DatasetReader reader(b.root);
    CHECK(kind_of([&] { reader.load_labels(entry_of(reader, id)); }) == Kind::ChecksumMismatch);
    CHECK(reader.load_labels(entry_of(reader, id), false)[0].beam.top1_rate == 8.25);
    const auto rep = reader.verify();
    REQUIRE(rep.problems.size() == 1);
    CHECK(rep.problems[0].kind == Kind::ChecksumMismatch);
    CHECK(rep.problems[0].path == "trajectories/" + id + "/labels.json");

    const fs::path cp = b.root / "trajectories" / id / "cloud_0001.bin";
    std::string cb = nff::read_binary_file(cp);
    cb[20] ^= 0x01;
    overwrite(cp, cb);
    CHECK(kind_of([&] { reader.load_cloud(entry_of(reader, id), 1); }) == Kind::ChecksumMismatch);
}

TEST_CASE("Format version changes are rejected", "[dataio]")
{
    const Built b = build_dataset("version");
    const fs::path mp = b.root / "manifest.json";
    auto m = nlohmann::json::parse(nff::read_binary_file(mp));
    m["format_version"] = nff::kFormatVersion + 1;
    overwrite(mp, m.dump());
    CHECK(kind_of([&] { nff::DatasetReader r(b.root); }) == Kind::VersionMismatch);
    overwrite(mp, "{ not json");
    CHECK(kind_of([&] { nff::DatasetReader r(b.root); }) == Kind::Parse);
    fs::remove(mp);
    CHECK(kind_of([&] { nff::DatasetReader r(b.root); }) == Kind::DanglingReference);
}

TEST_CASE("Missing files are dangling references", "[dataio]")
{
    const Built b = build_dataset("dangling");
    const std::string id = b.records[0].id;
    fs::remove(b.root / "trajectories" / id / "depth_0002.pgm");
    const nff::DatasetReader reader(b.root);
    CHECK(kind_of([&] { reader.load_view(entry_of(reader, id), 2); }) == Kind::DanglingReference);
    CHECK(kind_of([&] { reader.load_cloud(entry_of(reader, id), kT); }) == Kind::DanglingReference);
    const auto rep = reader.verify();
    REQUIRE(rep.problems.size() == 1);
    CHECK(rep.problems[0].kind == Kind::DanglingReference);
    CHECK(rep.problems[0].path == "trajectories/" + id + "/depth_0002.pgm");
}

TEST_CASE("Inconsistent manifests fail the integrity checks", "[dataio]")
{
    const Built b = build_dataset("integrity");
    const fs::path mp = b.root / "manifest.json";
    const auto original = nlohmann::json::parse(nff::read_binary_file(mp));

    auto m = original;
    m["statistics"]["mean_path_count"] = 2.5;
    overwrite(mp, m.dump());
    CHECK(kind_of([&] { nff::dataset_report(b.root); }) == Kind::Integrity);

    m = original;
    m["trajectories"][0]["los_count"] = 0;
    overwrite(mp, m.dump());
    CHECK(kind_of([&] { nff::dataset_report(b.root); }) == Kind::Integrity);

    m = original;
    m["splits"]["val"].push_back(m["splits"]["train"][0]);
    overwrite(mp, m.dump());
    CHECK_FALSE(nff::DatasetReader(b.root).verify().ok());

    m = original;
    m["trajectories"][0]["frames"] = kT + 1;
    overwrite(mp, m.dump());
    const nff::DatasetReader r(b.root);
    CHECK(kind_of([&] { r.load_csi(r.trajectories()[0]); }) == Kind::ShapeMismatch);
    CHECK(kind_of([&] { r.load_labels(r.trajectories()[0]); }) == Kind::ShapeMismatch);
}

TEST_CASE("Writer refuses records with missing modalities", "[dataio]")
{
    const fs::path root = fresh_dir("missing");
    auto rec = make_record(0, 0, 5);
    rec.views.pop_back();
    try {
        nff::write_trajectory(root, rec, "train");
        FAIL("no error");
    } catch (const DatasetError &e) {
        CHECK(e.kind() == Kind::MissingModality);
        CHECK(std::string(e.what()).find("views: 2 of 3") != std::string::npos);
    }
    rec = make_record(0, 0, 5);
    nff::Rng rng(1);
    rec.csi = make_csi(rng, kM, kK, kT - 1);
    CHECK(kind_of([&] { nff::write_trajectory(root, rec, "train"); }) == Kind::MissingModality);
    rec = make_record(0, 0, 5);
    rec.frames[1].index = 5;
    CHECK(kind_of([&] { nff::write_trajectory(root, rec, "train"); }) == Kind::MissingModality);
    CHECK_FALSE(fs::exists(root / "trajectories"));
}

TEST_CASE("Trajectory identifiers and entries", "[dataio]")
{
    CHECK(nff::trajectory_id(3, 17) == "city003_traj0017");
    CHECK(nff::trajectory_dir("city003_traj0017") == "trajectories/city003_traj0017");
    nff::TrajectoryEntry e;
    e.id = "city001_traj0002";
    e.city = 1;
    e.index = 2;
    e.split = "val";
    e.mode_id = 3;
    e.seed = 0xffffffffffffffffULL;
    e.frames = 2;
    e.los_count = 1;
    e.files = {{"trajectories/city001_traj0002/csi.bin", 48, 0x0123456789abcdefULL}};
    const auto j = nff::to_json(e);
    CHECK(j.at("files")[0].at("fnv1a64") == "0123456789abcdef");
    const auto back = nff::trajectory_entry_from_json(j);
    CHECK(back.seed == e.seed);
    CHECK(back.files[0].fnv1a64 == e.files[0].fnv1a64);
    CHECK(back.split == "val");
    CHECK(nff::to_string(Kind::ChecksumMismatch) == "checksum-mismatch");
}
