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

#include "nff/plot.hpp"

#include <algorithm>
#include <cstdio>

namespace nff {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 60.0, kRight = 150.0, kTop = 30.0, kBottom = 50.0;

const char *const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string color(std::size_t i) { return kPalette[i % (sizeof kPalette / sizeof kPalette[0])]; }

std::string escape(const std::string &s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

class Svg {
  public:
    Svg(double w, double h)
    {
        body_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) +
                "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " + num(h) +
                "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }
    void line(double x0, double y0, double x1, double y1, const std::string &stroke, double width = 1.0)
    {
        body_ += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(y1) +
                 "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"/>\n";
    }
    void rect(double x, double y, double w, double h, const std::string &fill, const std::string &stroke = "none")
    {
        body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
                 "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\"/>\n";
    }
    void circle(double x, double y, double r, const std::string &fill)
    {
        body_ += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"" + num(r) + "\" fill=\"" + fill + "\"/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>> &pts, const std::string &stroke, double width = 1.5)
    {
        body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i)
            body_ += (i ? " " : "") + num(pts[i].first) + "," + num(pts[i].second);
        body_ += "\"/>\n";
    }
    void text(double x, double y, const std::string &s, const std::string &anchor = "start")
    {
        body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\">" + escape(s) +
                 "</text>\n";
    }
    std::string finish() { return body_ + "</svg>\n"; }

  private:
    std::string body_;
};

struct Frame {
    double x_lo, x_hi, y_lo, y_hi;
    double px(double x) const { return kLeft + (x - x_lo) / (x_hi - x_lo) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y_lo) / (y_hi - y_lo) * (kHeight - kTop - kBottom); }
};

void axes(Svg &svg, const Frame &f, const std::string &xlabel, const std::string &ylabel, int yticks = 5)
{
    svg.line(kLeft, kHeight - kBottom, kWidth - kRight, kHeight - kBottom, "black");
    svg.line(kLeft, kTop, kLeft, kHeight - kBottom, "black");
    for (int i = 0; i <= yticks; ++i) {
        const double v = f.y_lo + (f.y_hi - f.y_lo) * i / yticks;
        svg.line(kLeft - 4, f.py(v), kLeft, f.py(v), "black");
        svg.text(kLeft - 6, f.py(v) + 4, num(v), "end");
    }
    svg.text(0.5 * (kLeft + kWidth - kRight), kHeight - 12, xlabel, "middle");
    svg.text(12, kTop - 10, ylabel);
}

void legend(Svg &svg, const std::vector<std::string> &names)
{
    for (std::size_t i = 0; i < names.size(); ++i) {
        const double y = kTop + 16.0 * static_cast<double>(i);
        svg.rect(kWidth - kRight + 12, y, 10, 10, color(i));
        svg.text(kWidth - kRight + 28, y + 9, names[i]);
    }
}

} // namespace

std::string svg_rate_bars(const EvaluationReport &report)
{
    Svg svg(kWidth, kHeight);
    double y_hi = 0.0;
    for (const auto &[cell, row] : report.cells)
        for (const auto &[s, v] : row)
            if (v)
                y_hi = std::max(y_hi, v->mean_rate);
    y_hi = y_hi > 0.0 ? 1.1 * y_hi : 1.0;
    const Frame f{0.0, static_cast<double>(kEvaluationCells.size()), 0.0, y_hi};
    axes(svg, f, "evaluation cell", "mean rate (bit/s/Hz)");
    const double group = f.px(1.0) - f.px(0.0);
    const double bar = 0.8 * group / static_cast<double>(std::max<std::size_t>(1, report.strategies.size()));
    for (std::size_t c = 0; c < kEvaluationCells.size(); ++c) {
        const std::string &cell = kEvaluationCells[c];
        svg.text(f.px(c + 0.5), kHeight - kBottom + 16, cell, "middle");
        const auto it = report.cells.find(cell);
        for (std::size_t s = 0; s < report.strategies.size(); ++s) {
            if (it == report.cells.end())
                continue;
            const auto v = it->second.find(report.strategies[s]);
            if (v == it->second.end() || !v->second)
                continue;
            const double x = f.px(static_cast<double>(c)) + 0.1 * group + bar * static_cast<double>(s);
            svg.rect(x, f.py(v->second->mean_rate), bar, f.py(0.0) - f.py(v->second->mean_rate), color(s));
        }
    }
    std::vector<std::string> names;
    for (Strategy s : report.strategies)
        names.push_back(to_string(s));
    legend(svg, names);
    return svg.finish();
}

std::string svg_gain_cdf(const EvaluationReport &report)
{
    Svg svg(kWidth, kHeight);
    const Frame f{0.0, 1.0, 0.0, 1.0};
    axes(svg, f, "normalized beamforming gain", "empirical CDF");
    for (int i = 0; i <= 5; ++i)
        svg.text(f.px(i / 5.0), kHeight - kBottom + 16, num(i / 5.0), "middle");
    std::vector<std::string> names;
    for (std::size_t s = 0; s < report.strategies.size(); ++s) {
        names.push_back(to_string(report.strategies[s]));
        const auto it = report.per_frame_norm_gain.find(report.strategies[s]);
        if (it == report.per_frame_norm_gain.end() || it->second.empty())
            continue;
        std::vector<double> g = it->second;
        std::sort(g.begin(), g.end());
        std::vector<std::pair<double, double>> pts{{f.px(0.0), f.py(0.0)}};
        const double n = static_cast<double>(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = std::clamp(g[i], 0.0, 1.0);
            pts.emplace_back(f.px(x), f.py(static_cast<double>(i) / n));
            pts.emplace_back(f.px(x), f.py(static_cast<double>(i + 1) / n));
        }
        pts.emplace_back(f.px(1.0), f.py(1.0));
        svg.polyline(pts, color(s));
    }
    legend(svg, names);
    return svg.finish();
}

std::string svg_beam_index(const std::vector<std::vector<int>> &series, int codebook_size)
{
    Svg svg(kWidth, kHeight);
    std::size_t frames = 1;
    for (const auto &s : series)
        frames = std::max(frames, s.size());
    const Frame f{0.0, static_cast<double>(std::max<std::size_t>(1, frames - 1)), 0.0,
                  static_cast<double>(std::max(1, codebook_size))};
    axes(svg, f, "frame", "top-1 beam index");
    std::vector<std::string> names;
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t t = 0; t < series[i].size(); ++t)
            pts.emplace_back(f.px(static_cast<double>(t)), f.py(series[i][t]));
        svg.polyline(pts, color(i));
        for (const auto &p : pts)
            svg.circle(p.first, p.second, 2.0, color(i));
        names.push_back("trajectory " + std::to_string(i));
    }
    legend(svg, names);
    return svg.finish();
}

std::string svg_scene_top_view(const Scene &scene, const std::vector<std::vector<Vec3>> &tracks)
{
    const double scale = 4.0;
    const double margin = 20.0;
    const Bounds &b = scene.bounds;
    const double w = (b.x1 - b.x0) * scale + 2 * margin;
    const double h = (b.y1 - b.y0) * scale + 2 * margin;
    auto px = [&](double x) { return margin + (x - b.x0) * scale; };
    auto py = [&](double y) { return margin + (b.y1 - y) * scale; };
    Svg svg(w, h);
    svg.rect(px(b.x0), py(b.y1), (b.x1 - b.x0) * scale, (b.y1 - b.y0) * scale, "#f2f2f2", "black");
    for (const Road &r : scene.roads)
        svg.rect(px(r.area.x0), py(r.area.y1), (r.area.x1 - r.area.x0) * scale, (r.area.y1 - r.area.y0) * scale,
                 "#c8c8c8");
    for (const Building &bd : scene.buildings) {
        const double shade = std::clamp(bd.height / std::max(1.0, b.z_max), 0.0, 1.0);
        char fill[16];
        std::snprintf(fill, sizeof fill, "#%02x%02x%02x", static_cast<int>(200 - 120 * shade),
                      static_cast<int>(160 - 100 * shade), static_cast<int>(120 - 80 * shade));
        svg.rect(px(bd.footprint.x0), py(bd.footprint.y1), (bd.footprint.x1 - bd.footprint.x0) * scale,
                 (bd.footprint.y1 - bd.footprint.y0) * scale, fill, "black");
    }
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        std::vector<std::pair<double, double>> pts;
        for (const Vec3 &p : tracks[i])
            pts.emplace_back(px(p.x), py(p.y));
        svg.polyline(pts, color(i), 2.0);
        if (!pts.empty())
            svg.circle(pts.front().first, pts.front().second, 3.0, color(i));
    }
    svg.circle(px(scene.bs_position.x), py(scene.bs_position.y), 5.0, "black");
    svg.text(px(scene.bs_position.x) + 8, py(scene.bs_position.y) + 4, "BS");
    return svg.finish();
}

} // namespace nff
