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

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "nff/channel.hpp"
#include "nff/labels.hpp"
#include "nff/sensors.hpp"
#include "nff/trajectory.hpp"

namespace nff {

inline constexpr int kFormatVersion = 1;
inline constexpr double kDepthUnitsPerMeter = 100.0; // depth PGM samples are centimeters

class DatasetError : public std::runtime_error {
  public:
    enum class Kind { VersionMismatch, ChecksumMismatch, DanglingReference, ShapeMismatch, MissingModality, Integrity, Io, Parse };

    DatasetError(Kind kind, std::string path, const std::string &message);
    Kind kind() const { return kind_; }
    const std::string &path() const { return path_; }

  private:
    Kind kind_;
    std::string path_;
};

std::string_view to_string(DatasetError::Kind kind);

// Binary codecs. Layouts are documented in docs/FORMAT.md.
std::string encode_csi(const CsiTensor &csi);
CsiTensor decode_csi(std::string_view bytes, const std::string &where);
std::string encode_cloud(const PointCloud &cloud);
PointCloud decode_cloud(std::string_view bytes, const std::string &where);
std::string encode_depth_pgm(const SensorImage &img);
std::string encode_semantic_pgm(const SensorImage &img);
/// Rebuilds depth and semantic planes; fov and position are left for the caller.
SensorImage decode_view(std::string_view depth_pgm, std::string_view semantic_pgm, const std::string &where);

struct FrameRecord {
    int index = 0;
    double t = 0.0;
    Vec3 gt_pos;
    Vec3 gt_vel;
    GpsObservation gps;
    bool los = false;
    bool beam_valid = true; // false when the channel is identically zero
    BeamLabel beam;
    std::size_t path_count = 0;
    double rms_delay_spread = 0.0;

    bool operator==(const FrameRecord &o) const;
};

nlohmann::json to_json(const FrameRecord &f, int mode_id);
FrameRecord frame_from_json(const nlohmann::json &j);

struct TrajectoryRecord {
    std::string id;
    int city = 0;
    int index = 0;
    TrajectoryMode mode;
    std::uint64_t seed = 0;
    double dt = 0.1;
    CsiTensor csi;
    std::vector<FrameRecord> frames;
    std::vector<PointCloud> clouds;
    std::vector<SensorImage> views;
};

struct FileEntry {
    std::string path; // relative to the dataset root, '/'-separated
    std::uint64_t bytes = 0;
    std::uint64_t fnv1a64 = 0;
};

struct TrajectoryEntry {
    std::string id;
    int city = 0;
    int index = 0;
    std::string split;
    int mode_id = 0;
    std::uint64_t seed = 0;
    int frames = 0;
    int los_count = 0;
    std::vector<FileEntry> files;
};

nlohmann::json to_json(const TrajectoryEntry &e);
TrajectoryEntry trajectory_entry_from_json(const nlohmann::json &j);

std::string trajectory_id(int city, int index);
std::string trajectory_dir(const std::string &id); // relative to the root

/// Writes one trajectory directory below `root`. Refuses records with missing modalities.
TrajectoryEntry write_trajectory(const std::filesystem::path &root, const TrajectoryRecord &rec,
                                 const std::string &split);

struct SplitAssignment {
    std::vector<int> train, val, test;

    std::string split_of(int city) const;
    bool operator==(const SplitAssignment &) const = default;
};

/// Seeded city-level split. val and test receive max(1, round(n * r / sum)) cities, train the rest.
SplitAssignment split_by_city(const std::vector<int> &cities, const std::array<double, 3> &ratios,
                              std::uint64_t seed);

struct SplitCounts {
    std::size_t samples = 0;
    std::size_t trajectories = 0;
    std::size_t los = 0;
    std::size_t nlos = 0;
};

struct DatasetStatistics {
    std::size_t samples = 0;
    std::size_t trajectories = 0;
    std::map<std::string, SplitCounts> splits;
    double mean_path_count = 0.0;
    double mean_rms_delay_spread_s = 0.0;
    double los_fraction = 0.0;

    nlohmann::json to_json() const;
};

/// Frame-order accumulation shared by the writer and the report.
class StatisticsAccumulator {
  public:
    void add_trajectory(const std::string &split, const std::vector<FrameRecord> &frames);
    DatasetStatistics finish() const;

  private:
    DatasetStatistics s_;
    double path_sum_ = 0.0;
    double rms_sum_ = 0.0;
};

void write_text_file(const std::filesystem::path &path, std::string_view contents);
std::string read_binary_file(const std::filesystem::path &path);

/// Assembles and writes manifest.json. `parameters` carries the physical constants of the run.
void write_manifest(const std::filesystem::path &root, const nlohmann::json &parameters, const nlohmann::json &config,
                    const SplitAssignment &splits, const std::vector<TrajectoryEntry> &entries,
                    const DatasetStatistics &stats);

struct SampleRecord {
    std::string trajectory;
    int city = 0;
    std::string split;
    TrajectoryMode mode;
    int frame = 0;
    Eigen::MatrixXcd csi; // M x K
    FrameRecord label;
    std::optional<PointCloud> cloud;
    std::optional<SensorImage> view;
};

struct IntegrityProblem {
    DatasetError::Kind kind;
    std::string path;
    std::string message;
};

struct IntegrityReport {
    std::vector<IntegrityProblem> problems;
    std::size_t files_checked = 0;
    bool ok() const { return problems.empty(); }
};

class DatasetReader;

/// Lazy sample stream: one trajectory's CSI and labels are resident at a time, sensor files load per frame.
class SampleStream {
  public:
    SampleStream(const DatasetReader &reader, std::vector<const TrajectoryEntry *> entries, bool with_sensors);
    std::optional<SampleRecord> next();

  private:
    const DatasetReader &reader_;
    std::vector<const TrajectoryEntry *> entries_;
    bool with_sensors_;
    std::size_t traj_ = 0;
    int frame_ = 0;
    std::optional<CsiTensor> csi_;
    std::vector<FrameRecord> labels_;
};

class DatasetReader {
  public:
    /// Parses manifest.json. Throws DatasetError (VersionMismatch, Parse, DanglingReference).
    explicit DatasetReader(const std::filesystem::path &root);

    const std::filesystem::path &root() const { return root_; }
    const nlohmann::json &manifest() const { return manifest_; }
    const nlohmann::json &parameters() const { return manifest_.at("parameters"); }
    const std::vector<TrajectoryEntry> &trajectories() const { return entries_; }
    std::vector<const TrajectoryEntry *> trajectories_in(const std::string &split) const;
    const SplitAssignment &splits() const { return splits_; }
    const PolarGrid &codebook_grid() const { return grid_; }
    int antennas() const { return m_; }
    int subcarriers() const { return k_; }
    int frames_per_trajectory() const { return t_; }

    /// Loads and checks one file referenced by `entry`. Missing files raise DanglingReference,
    /// undecodable content ShapeMismatch, and digest differences ChecksumMismatch.
    std::string load_file(const TrajectoryEntry &entry, const std::string &name, bool verify = true) const;
    CsiTensor load_csi(const TrajectoryEntry &entry, bool verify = true) const;
    std::vector<FrameRecord> load_labels(const TrajectoryEntry &entry, bool verify = true) const;
    PointCloud load_cloud(const TrajectoryEntry &entry, int frame, bool verify = true) const;
    SensorImage load_view(const TrajectoryEntry &entry, int frame, bool verify = true) const;
    TrajectoryRecord load_trajectory(const TrajectoryEntry &entry, bool with_sensors = true, bool verify = true) const;

    SampleStream samples(const std::string &split = "", bool with_sensors = true) const;

    /// Checks every referenced file: existence, length, digest, and CSI shape.
    IntegrityReport verify() const;

  private:
    std::filesystem::path root_;
    nlohmann::json manifest_;
    std::vector<TrajectoryEntry> entries_;
    SplitAssignment splits_;
    PolarGrid grid_;
    int m_ = 0, k_ = 0, t_ = 0;
    double fov_deg_ = 90.0;
    Vec3 camera_;
};

/// Recomputes statistics from the per-frame labels and cross-checks the manifest.
/// Throws DatasetError(Integrity) on any disagreement.
DatasetStatistics dataset_report(const std::filesystem::path &root);

} // namespace nff
