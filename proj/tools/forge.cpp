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

// forge: command-line front end of the dataset generator.
// Exit codes: 0 success, 2 config error, 3 generation failure, 4 integrity failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nff/config.hpp"
#include "nff/dataio.hpp"
#include "nff/errors.hpp"
#include "nff/pipeline.hpp"
#include "nff/plot.hpp"

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitGenerate = 3;
constexpr int kExitIntegrity = 4;

struct ConfigFlags {
    std::string file;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;

    nff::RunConfig load() const
    {
        std::vector<std::string> all = sets;
        if (seed)
            all.push_back("seed=" + std::to_string(*seed));
        return nff::load_config(file, all);
    }
};

void add_config_flags(CLI::App *cmd, ConfigFlags &flags)
{
    cmd->add_option("-c,--config", flags.file, "JSON run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--set", flags.sets, "Override a config value, e.g. --set carrier.subcarriers=32");
    cmd->add_option("--seed", flags.seed, "Root seed (same as --set seed=S)");
}

void write_file(const fs::path &path, const std::string &contents)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    nff::write_text_file(path, contents);
}

int cmd_scene(const ConfigFlags &flags, int city, const std::string &out, const std::string &svg)
{
    const nff::RunConfig cfg = flags.load();
    const nff::Scene scene = nff::city_scene(cfg, city);
    write_file(out, nff::to_json(scene).dump(1) + "\n");
    if (!svg.empty())
        write_file(svg, nff::svg_scene_top_view(scene));
    std::cout << "scene city " << city << ": " << scene.buildings.size() << " buildings, " << scene.roads.size()
              << " road segments -> " << out << "\n";
    return kExitOk;
}

int cmd_generate(const ConfigFlags &flags, const std::string &from_manifest, const std::string &out, int workers,
                 bool no_resume, bool quiet)
{
    nff::RunConfig cfg;
    if (!from_manifest.empty()) {
        json doc;
        try {
            doc = json::parse(nff::read_binary_file(from_manifest)).at("config");
        } catch (const json::exception &e) {
            throw nff::ConfigError("cannot read config from manifest '" + from_manifest + "': " + e.what());
        }
        std::vector<std::string> all = flags.sets;
        if (flags.seed)
            all.push_back("seed=" + std::to_string(*flags.seed));
        cfg = nff::config_from_json(nff::apply_overrides(doc, all));
    } else {
        cfg = flags.load();
    }
    nff::GenerateOptions opt;
    opt.workers = nff::workers_from_env(workers);
    opt.resume = !no_resume;
    if (!quiet)
        opt.progress = [](const std::string &line) { std::cerr << line << "\n"; };
    const nff::GenerateSummary s = nff::generate_dataset(cfg, out, opt);
    if (!s.ok()) {
        std::cerr << s.failures.size() << " of " << s.trajectories << " trajectories failed; see " << out
                  << ".partial/failures.log\n";
        for (const auto &f : s.failures)
            std::cerr << "  " << f.id << ": " << f.reason << "\n";
        return kExitGenerate;
    }
    std::cout << "wrote " << s.statistics.trajectories << " trajectories, " << s.statistics.samples << " samples to "
              << out;
    if (s.resumed > 0)
        std::cout << " (" << s.resumed << " resumed)";
    std::cout << "\n";
    return kExitOk;
}

int cmd_stats(const std::string &dataset, bool csv)
{
    const nff::DatasetStatistics s = nff::dataset_report(dataset);
    if (!csv) {
        std::cout << s.to_json().dump(1) << "\n";
        return kExitOk;
    }
    std::cout << "split,trajectories,samples,los,nlos\n";
    for (const auto &[name, c] : s.splits)
        std::cout << name << "," << c.trajectories << "," << c.samples << "," << c.los << "," << c.nlos << "\n";
    std::cout << "total," << s.trajectories << "," << s.samples << ",,\n";
    return kExitOk;
}

int cmd_validate(const std::string &dataset)
{
    const nff::DatasetReader reader(dataset);
    const nff::IntegrityReport rep = reader.verify();
    for (const auto &p : rep.problems)
        std::cerr << nff::to_string(p.kind) << ": " << p.path << ": " << p.message << "\n";
    if (!rep.ok()) {
        std::cerr << rep.problems.size() << " problem(s) in " << rep.files_checked << " files\n";
        return kExitIntegrity;
    }
    nff::dataset_report(dataset);
    std::cout << "ok: " << rep.files_checked << " files verified\n";
    return kExitOk;
}

std::vector<nff::Strategy> parse_strategies(const std::vector<std::string> &names)
{
    std::vector<nff::Strategy> out;
    for (const auto &n : names) {
        try {
            out.push_back(nff::strategy_from_string(n));
        } catch (const std::invalid_argument &e) {
            throw nff::ConfigError(e.what());
        }
        if (out.back() == nff::Strategy::ExternalPrediction)
            throw nff::ConfigError("strategy 'external' needs predictions and is not available here");
    }
    return out;
}

int cmd_evaluate(const std::string &dataset, const std::string &split, const std::vector<std::string> &names,
                 const std::string &out, bool localize)
{
    const nff::DatasetReader reader(dataset);
    const nff::RunConfig cfg = nff::config_from_json(reader.manifest().at("config"));
    const auto strategies = parse_strategies(names);
    const nff::SplitEvaluation ev = nff::evaluate_split(reader, split, strategies, cfg, localize);
    json doc = ev.report.to_json();
    doc["split"] = split;
    if (ev.localization) {
        const auto &l = *ev.localization;
        doc["localization"] = {{"frames", l.frames},
                               {"within_coverage", l.within_coverage},
                               {"within_cell_diagonal", l.within_bound},
                               {"mean_err_3d_m", l.mean_err_3d},
                               {"cell_diagonal_m", l.cell_diagonal}};
    }
    const fs::path dir(out);
    write_file(dir / "report.json", doc.dump(1) + "\n");
    write_file(dir / "report.csv", ev.report.to_csv());
    write_file(dir / "rate_bars.svg", nff::svg_rate_bars(ev.report));
    write_file(dir / "gain_cdf.svg", nff::svg_gain_cdf(ev.report));
    std::vector<std::vector<int>> shown(ev.chosen_beams.begin(),
                                        ev.chosen_beams.begin() + std::min<std::ptrdiff_t>(4, ev.chosen_beams.size()));
    write_file(dir / "beam_index.svg", nff::svg_beam_index(shown, static_cast<int>(reader.codebook_grid().size())));
    std::cout << ev.report.to_csv();
    std::cout << "report written to " << dir.string() << "\n";
    return kExitOk;
}

int cmd_plot(const std::string &dataset, int city, const std::string &out)
{
    const nff::DatasetReader reader(dataset);
    const nff::RunConfig cfg = nff::config_from_json(reader.manifest().at("config"));
    const nff::Scene scene = nff::city_scene(cfg, city);
    std::vector<std::vector<nff::Vec3>> tracks;
    std::vector<std::vector<int>> beams;
    for (const auto &e : reader.trajectories()) {
        if (e.city != city)
            continue;
        std::vector<nff::Vec3> track;
        std::vector<int> b;
        for (const auto &f : reader.load_labels(e)) {
            track.push_back(f.gt_pos);
            if (f.beam_valid)
                b.push_back(f.beam.top_global[0]);
        }
        tracks.push_back(std::move(track));
        if (beams.size() < 4)
            beams.push_back(std::move(b));
    }
    if (tracks.empty())
        throw nff::ConfigError("dataset holds no trajectories for city " + std::to_string(city));
    const fs::path dir(out);
    const std::string tag = "city" + std::to_string(city);
    write_file(dir / (tag + "_top_view.svg"), nff::svg_scene_top_view(scene, tracks));
    write_file(dir / (tag + "_beam_index.svg"),
               nff::svg_beam_index(beams, static_cast<int>(reader.codebook_grid().size())));
    std::cout << "plots written to " << dir.string() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"forge: near-field XL-MIMO low-altitude dataset generator"};
    app.require_subcommand(1);

    ConfigFlags scene_flags, gen_flags;
    int scene_city = 0;
    std::string scene_out = "scene.json", scene_svg;
    auto *scene = app.add_subcommand("scene", "Generate one city scene");
    add_config_flags(scene, scene_flags);
    scene->add_option("--city", scene_city, "City index")->check(CLI::NonNegativeNumber);
    scene->add_option("-o,--out", scene_out, "Output JSON file");
    scene->add_option("--svg", scene_svg, "Also write a top-view SVG");

    std::string gen_out, from_manifest;
    int workers = 1;
    bool no_resume = false, quiet = false;
    auto *gen = app.add_subcommand("generate", "Generate a dataset");
    add_config_flags(gen, gen_flags);
    gen->add_option("--from-manifest", from_manifest, "Reuse the config embedded in a manifest")->check(CLI::ExistingFile);
    gen->add_option("-o,--out", gen_out, "Dataset directory")->required();
    gen->add_option("-j,--workers", workers, "Worker threads (FORGE_WORKERS overrides)")->check(CLI::PositiveNumber);
    gen->add_flag("--no-resume", no_resume, "Discard an interrupted run instead of resuming it");
    gen->add_flag("-q,--quiet", quiet, "No per-trajectory progress");

    std::string dataset;
    bool stats_csv = false;
    auto *stats = app.add_subcommand("stats", "Recompute and cross-check dataset statistics");
    stats->add_option("dataset", dataset, "Dataset directory")->required();
    stats->add_flag("--csv", stats_csv, "Per-split CSV table instead of JSON");

    auto *validate = app.add_subcommand("validate", "Verify files, checksums and shapes");
    validate->add_option("dataset", dataset, "Dataset directory")->required();

    std::string split = "test", eval_out = "report";
    std::vector<std::string> strategies{"exhaustive", "far_field", "two_stage"};
    bool localize = false;
    auto *evaluate = app.add_subcommand("evaluate", "Run beam-training baselines over a split");
    evaluate->add_option("dataset", dataset, "Dataset directory")->required();
    evaluate->add_option("--split", split, "Split to evaluate")->check(CLI::IsMember({"train", "val", "test"}));
    evaluate->add_option("--strategies", strategies, "Strategies to run")->delimiter(',');
    evaluate->add_option("-o,--out", eval_out, "Report directory");
    evaluate->add_flag("--localize", localize, "Also run OMP localization on LoS frames");

    int plot_city = 0;
    std::string plot_out = "plots";
    auto *plot = app.add_subcommand("plot", "Scene top view and beam-index plots for one city");
    plot->add_option("dataset", dataset, "Dataset directory")->required();
    plot->add_option("--city", plot_city, "City index")->check(CLI::NonNegativeNumber);
    plot->add_option("-o,--out", plot_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*scene)
            return cmd_scene(scene_flags, scene_city, scene_out, scene_svg);
        if (*gen)
            return cmd_generate(gen_flags, from_manifest, gen_out, workers, no_resume, quiet);
        if (*stats)
            return cmd_stats(dataset, stats_csv);
        if (*validate)
            return cmd_validate(dataset);
        if (*evaluate)
            return cmd_evaluate(dataset, split, strategies, eval_out, localize);
        if (*plot)
            return cmd_plot(dataset, plot_city, plot_out);
    } catch (const nff::ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nff::DatasetError &e) {
        std::cerr << "integrity error: " << e.what() << "\n";
        return kExitIntegrity;
    } catch (const nff::InfeasibleLayout &e) {
        std::cerr << "generation failed: " << e.what() << "\n";
        return kExitGenerate;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitGenerate;
    }
    return kExitOk;
}
