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

#include "nff/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include "nff/channel.hpp"
#include "nff/checksum.hpp"
#include "nff/errors.hpp"
#include "nff/labels.hpp"
#include "nff/rng.hpp"
#include "nff/sensors.hpp"
#include "nff/trajectory.hpp"

namespace nff {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::uint64_t kSceneTag = 0x7363656e65ULL; // "scene"
constexpr std::uint64_t kTrajTag = 0x74726a63ULL;
constexpr std::uint64_t kGpsTag = 0x677073ULL;
constexpr std::uint64_t kSplitTag = 0x73706c74ULL;
constexpr const char *kEntryMarker = "entry.json";

struct Job {
    int city = 0;
    int index = 0;
    std::string id;
};

// Reuses a finished trajectory from an interrupted run when every file still matches its marker.
std::optional<TrajectoryEntry> reuse_entry(const fs::path &work, const Job &job, const std::string &split)
{
    const fs::path marker = work / trajectory_dir(job.id) / kEntryMarker;
    if (!fs::exists(marker))
        return std::nullopt;
    try {
        TrajectoryEntry e = trajectory_entry_from_json(json::parse(read_binary_file(marker)));
        if (e.id != job.id || e.split != split)
            return std::nullopt;
        for (const auto &f : e.files) {
            const fs::path p = work / f.path;
            if (!fs::exists(p) || fs::file_size(p) != f.bytes || fnv1a64_file(p) != f.fnv1a64)
                return std::nullopt;
        }
        return e;
    } catch (const std::exception &) {
        return std::nullopt;
    }
}

void quarantine(const fs::path &work, const std::string &id)
{
    const fs::path src = work / trajectory_dir(id);
    if (!fs::exists(src))
        return;
    const fs::path dst = work / "quarantine" / id;
    fs::create_directories(dst.parent_path());
    fs::remove_all(dst);
    fs::rename(src, dst);
}

} // namespace

std::uint64_t scene_seed(const RunConfig &cfg, int city)
{
    return derive_seed(cfg.seed, {kSceneTag, static_cast<std::uint64_t>(city)});
}

std::uint64_t trajectory_seed(const RunConfig &cfg, int city, int index)
{
    return derive_seed(cfg.seed, {kTrajTag, static_cast<std::uint64_t>(city), static_cast<std::uint64_t>(index)});
}

Scene city_scene(const RunConfig &cfg, int city) { return generate_scene(scene_seed(cfg, city), cfg.scene); }

ArrayGeometry run_array(const RunConfig &cfg, const Scene &scene)
{
    return make_upa(cfg.array.m_y, cfg.array.m_z, cfg.carrier.f_c_hz, scene.bs_position, cfg.array.spacing_wavelengths);
}

CameraPose run_camera(const RunConfig &cfg, const Scene &scene) { return {scene.bs_position, cfg.sensors.fov_deg}; }

json dataset_parameters(const RunConfig &cfg)
{
    const Vec3 bs{cfg.scene.bounds.x0, 0.5 * (cfg.scene.bounds.y0 + cfg.scene.bounds.y1), cfg.scene.bs_height};
    const ArrayGeometry array = make_upa(cfg.array.m_y, cfg.array.m_z, cfg.carrier.f_c_hz, bs, cfg.array.spacing_wavelengths);
    return {{"carrier",
             {{"f_c_hz", cfg.carrier.f_c_hz},
              {"delta_f_hz", cfg.carrier.delta_f_hz},
              {"subcarriers", cfg.carrier.subcarriers},
              {"subcarrier_offsets", "centered"},
              {"label_subcarrier", center_subcarrier(cfg.carrier.subcarriers)}}},
            {"array",
             {{"m_y", cfg.array.m_y},
              {"m_z", cfg.array.m_z},
              {"spacing_m", array.spacing},
              {"ordering", "row-major (m_y, m_z)"}}},
            {"frames", cfg.trajectory.frames},
            {"dt", cfg.trajectory.dt},
            {"codebook", to_json(cfg.codebook)},
            {"noise", {{"p_r", cfg.noise.receive_power(cfg.carrier.f_c_hz)}, {"sigma2", cfg.noise.sigma2}}},
            {"gps_sigma2", cfg.labels.gps_sigma2},
            {"los_rule", to_json(cfg)["labels"]["los_rule"]},
            {"sensors",
             {{"fov_deg", cfg.sensors.fov_deg},
              {"width", cfg.sensors.image.width},
              {"height", cfg.sensors.image.height},
              {"lidar_points", cfg.sensors.image.lidar_points},
              {"uav_radius", cfg.sensors.image.uav_radius},
              {"depth_units_per_m", kDepthUnitsPerMeter}}},
            {"bs_position", {bs.x, bs.y, bs.z}}};
}

TrajectoryRecord generate_trajectory(const RunConfig &cfg, const Scene &scene, const NearFieldCodebook &codebook,
                                     int city, int index)
{
    const auto modes = cfg.mode_list();
    TrajectoryRecord rec;
    rec.id = trajectory_id(city, index);
    rec.city = city;
    rec.index = index;
    rec.mode = modes[static_cast<std::size_t>(index) % modes.size()];
    rec.seed = trajectory_seed(cfg, city, index);
    rec.dt = cfg.trajectory.dt;

    const Trajectory traj = simulate_trajectory(scene, rec.mode, rec.seed, cfg.trajectory);
    const ArrayGeometry &array = codebook.array();
    const std::vector<double> freqs =
        subcarrier_frequencies(cfg.carrier.f_c_hz, cfg.carrier.delta_f_hz, cfg.carrier.subcarriers);
    const int label_k = static_cast<int>(center_subcarrier(cfg.carrier.subcarriers));
    const double p_r = cfg.noise.receive_power(cfg.carrier.f_c_hz);
    const CameraPose camera = run_camera(cfg, scene);
    const std::size_t ref = array.reference_index();

    std::vector<Eigen::MatrixXcd> channels;
    for (std::size_t i = 0; i < traj.frames.size(); ++i) {
        const Pose &pose = traj.frames[i];
        const PathSet paths = trace_paths(scene, array, pose.u, cfg.carrier.f_c_hz, cfg.raytrace);
        Eigen::MatrixXcd h = assemble_channel(paths, freqs);

        FrameRecord f;
        f.index = static_cast<int>(i);
        f.t = pose.t;
        f.gt_pos = pose.u;
        f.gt_vel = pose.v;
        f.los = los_indicator(paths, cfg.labels.los_rule, ref);
        const FrameChannelInfo info = frame_channel_info(paths, ref, f.los);
        f.path_count = info.path_count;
        f.rms_delay_spread = info.rms_delay_spread;
        f.gps = gps_observe(pose.u, cfg.labels.gps_sigma2, derive_seed(rec.seed, {kGpsTag, i}));
        try {
            f.beam = label_beams(h.col(label_k), codebook, p_r, cfg.noise.sigma2);
            f.beam_valid = true;
        } catch (const DegenerateChannel &) {
            f.beam_valid = false; // fully blocked frame: no codeword is meaningful
        }
        f.beam.los = f.los;
        rec.frames.push_back(f);
        channels.push_back(std::move(h));

        rec.clouds.push_back(lidar_scan(scene, pose.u, camera, cfg.sensors.image.lidar_points, cfg.sensors.image.uav_radius));
        rec.views.push_back(render_view(scene, pose.u, camera, cfg.sensors.image));
    }
    rec.csi = stack_frames(channels, cfg.carrier.f_c_hz, cfg.carrier.delta_f_hz);
    return rec;
}

int workers_from_env(int fallback)
{
    if (const char *env = std::getenv("FORGE_WORKERS")) {
        char *end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1 && v <= 256)
            return static_cast<int>(v);
    }
    return fallback;
}

GenerateSummary generate_dataset(const RunConfig &cfg, const fs::path &out, const GenerateOptions &options)
{
    cfg.validate();
    const json config_doc = to_json(cfg);
    fs::path work = out;
    work += ".partial";

    // A partial directory from a different config cannot be resumed.
    const fs::path stamp = work / "config.json";
    bool fresh = !options.resume || !fs::exists(stamp);
    if (!fresh) {
        try {
            fresh = json::parse(read_binary_file(stamp)) != config_doc;
        } catch (const std::exception &) {
            fresh = true;
        }
    }
    if (fresh) {
        fs::remove_all(work);
        fs::create_directories(work);
        write_text_file(stamp, config_doc.dump(1) + "\n");
    }
    fs::remove_all(work / "quarantine");
    fs::remove(work / "failures.log");

    std::vector<int> cities(static_cast<std::size_t>(cfg.dataset.cities));
    for (int c = 0; c < cfg.dataset.cities; ++c)
        cities[static_cast<std::size_t>(c)] = c;
    const SplitAssignment splits = split_by_city(cities, cfg.dataset.split_ratios, derive_seed(cfg.seed, {kSplitTag}));

    std::vector<Job> jobs;
    for (int c = 0; c < cfg.dataset.cities; ++c)
        for (int i = 0; i < cfg.dataset.trajectories_per_city; ++i)
            jobs.push_back({c, i, trajectory_id(c, i)});

    // Scenes and codebooks are built lazily, once per city.
    struct CityState {
        std::once_flag once;
        std::optional<Scene> scene;
        std::optional<NearFieldCodebook> codebook;
        std::string error;
    };
    std::vector<CityState> city_state(cities.size());
    auto city = [&](int c) -> CityState & {
        CityState &s = city_state[static_cast<std::size_t>(c)];
        std::call_once(s.once, [&] {
            try {
                s.scene = city_scene(cfg, c);
                s.codebook.emplace(cfg.codebook, run_array(cfg, *s.scene), cfg.carrier.f_c_hz);
            } catch (const std::exception &e) {
                s.error = std::string("scene generation failed: ") + e.what();
            }
        });
        return s;
    };

    std::vector<std::optional<TrajectoryEntry>> entries(jobs.size());
    std::vector<std::string> errors(jobs.size());
    std::vector<char> resumed(jobs.size(), 0);
    std::atomic<std::size_t> next{0};
    std::mutex report_mutex;
    std::size_t done = 0;

    auto worker = [&] {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size())
                return;
            const Job &job = jobs[j];
            const std::string split = splits.split_of(job.city);
            std::string status;
            if (auto e = options.resume ? reuse_entry(work, job, split) : std::nullopt) {
                entries[j] = std::move(e);
                resumed[j] = 1;
                status = "resumed";
            } else {
                fs::remove_all(work / trajectory_dir(job.id));
                try {
                    CityState &cs = city(job.city);
                    if (!cs.error.empty())
                        throw std::runtime_error(cs.error);
                    const TrajectoryRecord rec = generate_trajectory(cfg, *cs.scene, *cs.codebook, job.city, job.index);
                    TrajectoryEntry e = write_trajectory(work, rec, split);
                    write_text_file(work / trajectory_dir(job.id) / kEntryMarker, to_json(e).dump() + "\n");
                    entries[j] = std::move(e);
                    status = "ok";
                } catch (const std::exception &e) {
                    errors[j] = e.what();
                    status = "FAILED";
                }
            }
            if (options.progress) {
                std::lock_guard<std::mutex> lock(report_mutex);
                ++done;
                options.progress("[" + std::to_string(done) + "/" + std::to_string(jobs.size()) + "] " + job.id + " " +
                                 status);
            }
        }
    };
    const int n_workers = std::clamp(options.workers, 1, static_cast<int>(std::max<std::size_t>(1, jobs.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w)
            pool.emplace_back(worker);
        for (auto &t : pool)
            t.join();
    }

    GenerateSummary summary;
    summary.trajectories = jobs.size();
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        summary.resumed += resumed[j] ? 1 : 0;
        if (!entries[j])
            summary.failures.push_back({jobs[j].id, errors[j]});
    }
    if (!summary.ok()) {
        std::string log;
        for (const auto &f : summary.failures) {
            quarantine(work, f.id);
            log += f.id + "\t" + f.reason + "\n";
        }
        write_text_file(work / "failures.log", log);
        return summary;
    }

    std::vector<TrajectoryEntry> final_entries;
    StatisticsAccumulator acc;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        TrajectoryEntry &e = *entries[j];
        const json labels = json::parse(read_binary_file(work / trajectory_dir(e.id) / "labels.json"));
        std::vector<FrameRecord> frames;
        for (const auto &f : labels.at("frames"))
            frames.push_back(frame_from_json(f));
        acc.add_trajectory(e.split, frames);
        fs::remove(work / trajectory_dir(e.id) / kEntryMarker);
        final_entries.push_back(std::move(e));
    }
    summary.statistics = acc.finish();
    write_manifest(work, dataset_parameters(cfg), config_doc, splits, final_entries, summary.statistics);
    fs::remove(stamp);
    fs::remove_all(out);
    fs::rename(work, out);
    return summary;
}

SplitEvaluation evaluate_split(const DatasetReader &reader, const std::string &split,
                               const std::vector<Strategy> &strategies, const RunConfig &cfg, bool localize)
{
    const auto entries = reader.trajectories_in(split);
    if (entries.empty())
        throw DatasetError(DatasetError::Kind::MissingModality, "manifest.json", "split '" + split + "' holds no trajectories");

    const json &p = reader.parameters();
    const Vec3 bs{p.at("bs_position").at(0).get<double>(), p.at("bs_position").at(1).get<double>(),
                  p.at("bs_position").at(2).get<double>()};
    const double f_c = p.at("carrier").at("f_c_hz").get<double>();
    const ArrayGeometry array = make_upa(cfg.array.m_y, cfg.array.m_z, f_c, bs, cfg.array.spacing_wavelengths);
    const NearFieldCodebook near(reader.codebook_grid(), array, f_c);
    const FarFieldCodebook far(reader.codebook_grid(), array, f_c);
    const int label_k = p.at("carrier").at("label_subcarrier").get<int>();
    const double p_r = p.at("noise").at("p_r").get<double>();
    const double sigma2 = p.at("noise").at("sigma2").get<double>();

    std::optional<NearFieldCodebook> dict;
    LocalizationSummary loc;
    if (localize) {
        dict.emplace(cfg.localization.grid, array, f_c);
        loc.cell_diagonal = worst_cell_diagonal(cfg.localization.grid, bs);
    }

    SplitEvaluation out;
    std::vector<EvalFrame> frames;
    for (const TrajectoryEntry *e : entries) {
        const CsiTensor csi = reader.load_csi(*e);
        const auto labels = reader.load_labels(*e);
        const Difficulty difficulty = mode_by_id(e->mode_id).difficulty;
        std::vector<int> beams;
        for (int t = 0; t < csi.t; ++t) {
            const auto &lab = labels[static_cast<std::size_t>(t)];
            if (!lab.beam_valid)
                continue;
            EvalFrame f;
            f.h = csi.column(label_k, t);
            f.los = lab.los;
            f.difficulty = difficulty;
            f.top1_global = lab.beam.top_global[0];
            beams.push_back(lab.beam.top_global[0]);
            if (dict && lab.los) {
                const LocalizationResult r = omp_localize(f.h, *dict, lab.gt_pos, cfg.localization.iterations);
                ++loc.frames;
                loc.errors.push_back(r.err_3d);
                loc.mean_err_3d += r.err_3d;
                if (within_coverage(cfg.localization.grid, bs, lab.gt_pos)) {
                    ++loc.within_coverage;
                    loc.within_bound += r.err_3d <= loc.cell_diagonal ? 1 : 0;
                }
            }
            frames.push_back(std::move(f));
        }
        out.chosen_beams.push_back(std::move(beams));
    }
    out.report = evaluate_dataset(frames, near, far, strategies, p_r, sigma2);
    if (dict) {
        if (loc.frames > 0)
            loc.mean_err_3d /= static_cast<double>(loc.frames);
        out.localization = std::move(loc);
    }
    return out;
}

} // namespace nff
