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

#include "nff/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "nff/constants.hpp"
#include "nff/errors.hpp"
#include "nff/rng.hpp"

namespace nff {

namespace {

constexpr std::array<TrajectoryMode, 10> kModes{{
    {1, ModeName::Zigzag, {0.0, 5.0}, {0.0, 1.5}, {5.0, 15.0}, Difficulty::Hard},
    {2, ModeName::WallHug, {5.0, 15.0}, {0.0, 0.0}, {5.0, 20.0}, Difficulty::Hard},
    {3, ModeName::Inspect, {0.0, 0.0}, {0.0, 2.0}, {2.0, 60.0}, Difficulty::Hard},
    {4, ModeName::SuddenTurn, {8.0, 12.0}, {0.0, 2.0}, {5.0, 45.0}, Difficulty::Hard},
    {5, ModeName::StreetPatrol, {8.0, 12.0}, {0.0, 2.0}, {5.0, 45.0}, Difficulty::Easy},
    {6, ModeName::Hover, {0.0, 0.0}, {0.0, 0.5}, {10.0, 80.0}, Difficulty::Easy},
    {7, ModeName::CityCruise, {8.0, 15.0}, {0.0, 0.0}, {30.0, 60.0}, Difficulty::Easy},
    {8, ModeName::Orbit, {0.0, 10.0}, {0.0, 0.0}, {30.0, 60.0}, Difficulty::Easy},
    {9, ModeName::FastTransit, {15.0, 25.0}, {0.0, 0.0}, {50.0, 80.0}, Difficulty::Easy},
    {10, ModeName::Scan, {0.0, 12.0}, {0.0, 0.0}, {50.0, 80.0}, Difficulty::Easy},
}};

constexpr std::array<std::string_view, 10> kModeLabels{"Zigzag",       "WallHug", "Inspect",    "SuddenTurn",
                                                       "StreetPatrol", "Hover",   "CityCruise", "Orbit",
                                                       "FastTransit",  "Scan"};

Vec3 horizontal(double heading, double speed) { return {speed * std::cos(heading), speed * std::sin(heading), 0.0}; }

double horizontal_norm(const Vec3 &v) { return std::hypot(v.x, v.y); }

bool segment_hits_box(const Vec3 &a, const Vec3 &b, const Vec3 &lo, const Vec3 &hi)
{
    double t0 = 0.0, t1 = 1.0;
    for (int ax = 0; ax < 3; ++ax) {
        const double d = b[ax] - a[ax];
        if (std::abs(d) < 1e-15) {
            if (a[ax] < lo[ax] || a[ax] > hi[ax])
                return false;
            continue;
        }
        double ta = (lo[ax] - a[ax]) / d, tb = (hi[ax] - a[ax]) / d;
        if (ta > tb)
            std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1)
            return false;
    }
    return true;
}

struct Context {
    const Scene &scene;
    const TrajectoryMode &mode;
    const TrajectoryParams &params;

    bool in_bounds(const Vec3 &p) const
    {
        const Bounds &b = scene.bounds;
        const double m = params.bounds_margin;
        return p.x >= b.x0 + m && p.x <= b.x1 - m && p.y >= b.y0 + m && p.y <= b.y1 - m;
    }
    bool point_clear(const Vec3 &p) const
    {
        if (!in_bounds(p) || !mode.altitude.contains(p.z) || p.z <= 0.0)
            return false;
        return scene.building_containing(p, params.clearance) < 0;
    }
    bool segment_clear(const Vec3 &a, const Vec3 &b) const
    {
        const double c = params.clearance;
        for (const auto &bd : scene.buildings) {
            const Vec3 lo{bd.footprint.x0 - c, bd.footprint.y0 - c, -1e9};
            const Vec3 hi{bd.footprint.x1 + c, bd.footprint.y1 + c, bd.height + c};
            if (segment_hits_box(a, b, lo, hi))
                return false;
        }
        return true;
    }
    double horizon() const { return params.frames * params.dt; }
};

bool sample_free_point(const Context &ctx, Rng &rng, double z_lo, double z_hi, Vec3 &out, int tries = 256)
{
    const Bounds &b = ctx.scene.bounds;
    const double m = ctx.params.bounds_margin;
    for (int i = 0; i < tries; ++i) {
        const Vec3 p{rng.uniform(b.x0 + m, b.x1 - m), rng.uniform(b.y0 + m, b.y1 - m), rng.uniform(z_lo, z_hi)};
        if (ctx.point_clear(p)) {
            out = p;
            return true;
        }
    }
    return false;
}

/// Piecewise-linear horizontal path parameterized by arc length. Closed paths wrap; open paths ping-pong.
class Polyline {
  public:
    Polyline(std::vector<Vec3> pts, bool closed) : pts_(std::move(pts)), closed_(closed)
    {
        if (closed_)
            pts_.push_back(pts_.front());
        cum_.push_back(0.0);
        for (std::size_t i = 1; i < pts_.size(); ++i)
            cum_.push_back(cum_.back() + distance(pts_[i - 1], pts_[i]));
    }
    double length() const { return cum_.back(); }
    Vec3 at(double s) const
    {
        const double len = length();
        if (closed_) {
            s = std::fmod(s, len);
            if (s < 0.0)
                s += len;
        } else {
            s = std::fmod(s, 2.0 * len);
            if (s < 0.0)
                s += 2.0 * len;
            if (s > len)
                s = 2.0 * len - s;
        }
        auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
        std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - cum_.begin()));
        i = std::min(i, pts_.size() - 1);
        const double seg = cum_[i] - cum_[i - 1];
        const double f = seg > 0.0 ? (s - cum_[i - 1]) / seg : 0.0;
        return pts_[i - 1] + (pts_[i] - pts_[i - 1]) * f;
    }

  private:
    std::vector<Vec3> pts_;
    bool closed_;
    std::vector<double> cum_;
};

struct State {
    Vec3 pos;
    Vec3 v_prev;
    int frame = 0;
};

class Planner {
  public:
    explicit Planner(const Context &ctx) : ctx_(ctx) {}
    virtual ~Planner() = default;
    virtual bool start(Rng &rng, Vec3 &pos) = 0;
    virtual void begin_frame(const State &, Rng &) {}
    virtual Vec3 command(const State &st) = 0;
    virtual void redraw(const State &st, Rng &rng) = 0;
    virtual void accept(const State &, const Vec3 &, Rng &) {}
    /// Direction used when a command falls below the minimum horizontal speed.
    virtual Vec3 heading() const { return {1.0, 0.0, 0.0}; }

  protected:
    double dt() const { return ctx_.params.dt; }
    const Context &ctx_;
};

class ZigzagPlanner : public Planner {
  public:
    using Planner::Planner;
    bool start(Rng &rng, Vec3 &pos) override
    {
        psi_ = rng.uniform(0.0, 2.0 * kPi);
        forward_ = rng.uniform(1.5, 3.0);
        amp_ = rng.uniform(2.0, 3.5);
        period_ = rng.uniform(0.8, 1.6);
        phase_ = rng.uniform(0.0, 2.0 * kPi);
        vert_amp_ = rng.uniform(0.2, 1.2);
        vert_period_ = rng.uniform(1.5, 3.0);
        return sample_free_point(ctx_, rng, ctx_.mode.altitude.lo + 1.0, ctx_.mode.altitude.hi - 1.0, pos);
    }
    Vec3 command(const State &st) override
    {
        const double t = st.frame * dt();
        const double lateral = amp_ * std::sin(2.0 * kPi * t / period_ + phase_);
        const Vec3 fwd = horizontal(psi_, 1.0), side{-fwd.y, fwd.x, 0.0};
        Vec3 v = fwd * forward_ + side * lateral;
        v.z = vert_amp_ * std::sin(2.0 * kPi * t / vert_period_ + phase_);
        return v;
    }
    void redraw(const State &, Rng &rng) override { psi_ = rng.uniform(0.0, 2.0 * kPi); }
    Vec3 heading() const override { return horizontal(psi_, 1.0); }

  private:
    double psi_ = 0.0, forward_ = 0.0, amp_ = 0.0, period_ = 1.0, phase_ = 0.0, vert_amp_ = 0.0, vert_period_ = 1.0;
};

/// Shared logic for modes that track a horizontal path at constant altitude.
class PathPlanner : public Planner {
  public:
    using Planner::Planner;
    Vec3 command(const State &st) override
    {
        pending_ = s_ + dir_ * speed_ * dt();
        Vec3 target = path_->at(pending_);
        target.z = st.pos.z;
        return (target - st.pos) / dt();
    }
    void redraw(const State &, Rng &) override { dir_ = -dir_; }
    void accept(const State &, const Vec3 &, Rng &) override { s_ = pending_; }
    Vec3 heading() const override
    {
        const Vec3 d = path_->at(s_ + dir_ * 0.5) - path_->at(s_);
        return norm(d) > 1e-12 ? normalized(d) : Vec3{1.0, 0.0, 0.0};
    }

  protected:
    std::unique_ptr<Polyline> path_;
    double s_ = 0.0, pending_ = 0.0, dir_ = 1.0, speed_ = 0.0;
};

class WallHugPlanner : public PathPlanner {
  public:
    using PathPlanner::PathPlanner;
    bool start(Rng &rng, Vec3 &pos) override
    {
        const auto &bs = ctx_.scene.buildings;
        const Building &b = bs[rng.uniform_index(bs.size())];
        const double standoff = rng.uniform(3.0, 5.0);
        const Rect r{b.footprint.x0 - standoff, b.footprint.x1 + standoff, b.footprint.y0 - standoff,
                     b.footprint.y1 + standoff};
        const double z = rng.uniform(ctx_.mode.altitude.lo + 1.0, std::min(ctx_.mode.altitude.hi - 1.0, b.height));
        path_ = std::make_unique<Polyline>(
            std::vector<Vec3>{{r.x0, r.y0, z}, {r.x1, r.y0, z}, {r.x1, r.y1, z}, {r.x0, r.y1, z}}, true);
        s_ = rng.uniform(0.0, path_->length());
        dir_ = rng.bernoulli(0.5) ? 1.0 : -1.0;
        speed_ = rng.uniform(7.5, 13.0);
        pos = path_->at(s_);
        pos.z = z;
        return true;
    }
};

class ScanPlanner : public PathPlanner {
  public:
    using PathPlanner::PathPlanner;
    bool start(Rng &rng, Vec3 &pos) override
    {
        const Bounds &b = ctx_.scene.bounds;
        const double m = ctx_.params.bounds_margin;
        const int lanes = rng.uniform_int(3, 6);
        const double lane_len = rng.uniform(15.0, 40.0);
        const double spacing = rng.uniform(5.0, 10.0);
        const bool along_x = rng.bernoulli(0.5);
        const double dim_x = along_x ? lane_len : (lanes - 1) * spacing;
        const double dim_y = along_x ? (lanes - 1) * spacing : lane_len;
        if (dim_x > b.x1 - b.x0 - 2 * m || dim_y > b.y1 - b.y0 - 2 * m)
            return false;
        const double x0 = rng.uniform(b.x0 + m, b.x1 - m - dim_x);
        const double y0 = rng.uniform(b.y0 + m, b.y1 - m - dim_y);
        const double z = rng.uniform(ctx_.mode.altitude.lo + 1.0, ctx_.mode.altitude.hi - 1.0);
        std::vector<Vec3> pts;
        for (int i = 0; i < lanes; ++i) {
            const double c = i * spacing;
            const double a0 = (i % 2 == 0) ? 0.0 : lane_len;
            const double a1 = lane_len - a0;
            if (along_x) {
                pts.push_back({x0 + a0, y0 + c, z});
                pts.push_back({x0 + a1, y0 + c, z});
            } else {
                pts.push_back({x0 + c, y0 + a0, z});
                pts.push_back({x0 + c, y0 + a1, z});
            }
        }
        path_ = std::make_unique<Polyline>(std::move(pts), false);
        s_ = rng.uniform(0.0, path_->length());
        dir_ = rng.bernoulli(0.5) ? 1.0 : -1.0;
        speed_ = rng.uniform(4.0, 11.0);
        pos = path_->at(s_);
        pos.z = z;
        return true;
    }
};

class InspectPlanner : public Planner {
  public:
    using Planner::Planner;
    bool start(Rng &rng, Vec3 &pos) override
    {
        std::vector<std::size_t> tall, all;
        for (std::size_t i = 0; i < ctx_.scene.buildings.size(); ++i) {
            all.push_back(i);
            if (ctx_.scene.buildings[i].height >= 30.0)
                tall.push_back(i);
        }
        const auto &pool = tall.empty() ? all : tall;
        const Building &b = ctx_.scene.buildings[pool[rng.uniform_index(pool.size())]];
        const int side = rng.uniform_int(0, 3);
        const double standoff = rng.uniform(3.0, 5.0);
        const Rect &f = b.footprint;
        Vec3 p;
        if (side < 2) {
            p.x = side == 0 ? f.x0 - standoff : f.x1 + standoff;
            p.y = rng.uniform(f.y0 + 1.0, f.y1 - 1.0);
        } else {
            p.y = side == 2 ? f.y0 - standoff : f.y1 + standoff;
            p.x = rng.uniform(f.x0 + 1.0, f.x1 - 1.0);
        }
        lo_ = ctx_.mode.altitude.lo;
        hi_ = std::min(ctx_.mode.altitude.hi, b.height);
        p.z = rng.uniform(lo_ + 0.5, hi_ - 0.5);
        w_ = rng.uniform(0.5, ctx_.mode.v_vert.hi) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
        pos = p;
        return true;
    }
    Vec3 command(const State &st) override
    {
        pending_ = w_;
        const double z = st.pos.z + w_ * dt();
        if (z > hi_ || z < lo_)
            pending_ = -w_;
        return {0.0, 0.0, pending_};
    }
    void redraw(const State &, Rng &) override { w_ = -w_; }
    void accept(const State &, const Vec3 &v, Rng &) override { w_ = v.z != 0.0 ? v.z : pending_; }

  private:
    double lo_ = 0.0, hi_ = 0.0, w_ = 0.0, pending_ = 0.0;
};

/// Road centerline network: nodes at road ends and crossings.
struct RoadGraph {
    std::vector<Vec3> nodes;
    std::vector<std::vector<int>> adj;

    int node(const Vec3 &p)
    {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (std::abs(nodes[i].x - p.x) < 1e-6 && std::abs(nodes[i].y - p.y) < 1e-6)
                return static_cast<int>(i);
        nodes.push_back(p);
        adj.emplace_back();
        return static_cast<int>(nodes.size() - 1);
    }
    void link(int a, int b)
    {
        if (a == b)
            return;
        auto &la = adj[static_cast<std::size_t>(a)];
        if (std::find(la.begin(), la.end(), b) == la.end()) {
            la.push_back(b);
            adj[static_cast<std::size_t>(b)].push_back(a);
        }
    }
};

RoadGraph build_road_graph(const Scene &scene, double margin)
{
    struct Line {
        bool vertical;
        double c, lo, hi;
    };
    std::vector<Line> lines;
    const Bounds &b = scene.bounds;
    for (const auto &r : scene.roads) {
        const Rect &a = r.area;
        if (a.width() <= a.depth())
            lines.push_back({true, 0.5 * (a.x0 + a.x1), std::max(a.y0, b.y0 + margin), std::min(a.y1, b.y1 - margin)});
        else
            lines.push_back({false, 0.5 * (a.y0 + a.y1), std::max(a.x0, b.x0 + margin), std::min(a.x1, b.x1 - margin)});
    }
    RoadGraph g;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const Line &l = lines[i];
        if (l.hi <= l.lo)
            continue;
        std::vector<double> stops{l.lo, l.hi};
        for (std::size_t j = 0; j < lines.size(); ++j) {
            const Line &o = lines[j];
            if (o.vertical == l.vertical)
                continue;
            if (o.c > l.lo && o.c < l.hi && l.c >= o.lo && l.c <= o.hi)
                stops.push_back(o.c);
        }
        std::sort(stops.begin(), stops.end());
        int prev = -1;
        for (double s : stops) {
            const Vec3 p = l.vertical ? Vec3{l.c, s, 0.0} : Vec3{s, l.c, 0.0};
            const int n = g.node(p);
            if (prev >= 0)
                g.link(prev, n);
            prev = n;
        }
    }
    return g;
}

class StreetPatrolPlanner : public Planner {
  public:
    StreetPatrolPlanner(const Context &ctx) : Planner(ctx), graph_(build_road_graph(ctx.scene, ctx.params.bounds_margin))
    {
    }
    bool start(Rng &rng, Vec3 &pos) override
    {
        std::vector<std::pair<int, int>> edges;
        for (std::size_t a = 0; a < graph_.adj.size(); ++a)
            for (int bn : graph_.adj[a])
                if (static_cast<int>(a) < bn)
                    edges.emplace_back(static_cast<int>(a), bn);
        if (edges.empty())
            return false;
        auto [a, b] = edges[rng.uniform_index(edges.size())];
        if (rng.bernoulli(0.5))
            std::swap(a, b);
        prev_ = a;
        target_ = b;
        const double f = rng.uniform(0.2, 0.8);
        pos = graph_.nodes[static_cast<std::size_t>(a)] +
              (graph_.nodes[static_cast<std::size_t>(b)] - graph_.nodes[static_cast<std::size_t>(a)]) * f;
        pos.z = rng.uniform(8.0, 40.0);
        speed_ = rng.uniform(8.5, 11.5);
        vz_ = rng.uniform(-1.0, 1.0);
        return true;
    }
    Vec3 command(const State &st) override
    {
        Vec3 to = graph_.nodes[static_cast<std::size_t>(target_)] - st.pos;
        to.z = 0.0;
        const Vec3 desired = norm(to) > 1e-9 ? normalized(to) * speed_ : heading() * speed_;
        Vec3 v = desired;
        if (st.frame > 0) {
            Vec3 prev = st.v_prev;
            prev.z = 0.0;
            Vec3 dv = desired - prev;
            const double lim = kSteeringAcceleration * dt();
            if (norm(dv) > lim)
                dv = normalized(dv) * lim;
            v = prev + dv;
        }
        v.z = vz_;
        return v;
    }
    void redraw(const State &, Rng &) override { std::swap(prev_, target_); }
    void accept(const State &st, const Vec3 &v, Rng &rng) override
    {
        const Vec3 next = st.pos + v * dt();
        const Vec3 t = graph_.nodes[static_cast<std::size_t>(target_)];
        if (std::hypot(next.x - t.x, next.y - t.y) < std::max(2.0, speed_ * dt())) {
            const auto &nb = graph_.adj[static_cast<std::size_t>(target_)];
            std::vector<int> options;
            for (int n : nb)
                if (n != prev_)
                    options.push_back(n);
            if (options.empty())
                options = nb;
            prev_ = target_;
            target_ = options[rng.uniform_index(options.size())];
        }
        vz_ = v.z;
    }
    Vec3 heading() const override
    {
        const Vec3 d = graph_.nodes[static_cast<std::size_t>(target_)] - graph_.nodes[static_cast<std::size_t>(prev_)];
        return norm(d) > 1e-12 ? normalized(d) : Vec3{1.0, 0.0, 0.0};
    }

  private:
    static constexpr double kSteeringAcceleration = 20.0; // m/s^2
    RoadGraph graph_;
    int prev_ = 0, target_ = 0;
    double speed_ = 0.0, vz_ = 0.0;
};

class SuddenTurnPlanner : public Planner {
  public:
    SuddenTurnPlanner(const Context &ctx) : Planner(ctx), graph_(build_road_graph(ctx.scene, ctx.params.bounds_margin))
    {
    }
    bool start(Rng &rng, Vec3 &pos) override
    {
        speed_ = rng.uniform(8.5, 11.5);
        vz_ = rng.uniform(-1.5, 1.5);
        turn_frame_ = rng.uniform_int(1, ctx_.params.frames - 1);
        std::vector<std::pair<int, int>> edges;
        for (std::size_t a = 0; a < graph_.adj.size(); ++a)
            for (int bn : graph_.adj[a])
                if (static_cast<int>(a) < bn)
                    edges.emplace_back(static_cast<int>(a), bn);
        if (edges.empty()) {
            psi_ = rng.uniform(0.0, 2.0 * kPi);
            return sample_free_point(ctx_, rng, ctx_.mode.altitude.lo + 1.0, ctx_.mode.altitude.hi - 1.0, pos);
        }
        auto [a, b] = edges[rng.uniform_index(edges.size())];
        if (rng.bernoulli(0.5))
            std::swap(a, b);
        const Vec3 pa = graph_.nodes[static_cast<std::size_t>(a)], pb = graph_.nodes[static_cast<std::size_t>(b)];
        pos = pa + (pb - pa) * rng.uniform(0.2, 0.8);
        pos.z = rng.uniform(ctx_.mode.altitude.lo + 3.0, ctx_.mode.altitude.hi - 1.0);
        psi_ = std::atan2(pb.y - pa.y, pb.x - pa.x);
        return true;
    }
    void begin_frame(const State &st, Rng &rng) override
    {
        frame_heading_ = psi_;
        if (st.frame > 0 && (st.frame == turn_frame_ || rng.bernoulli(0.1)))
            psi_ = turned(rng);
    }
    Vec3 command(const State &) override
    {
        Vec3 v = horizontal(psi_, speed_);
        v.z = vz_;
        return v;
    }
    void redraw(const State &st, Rng &rng) override
    {
        psi_ = st.frame > 0 ? turned(rng) : rng.uniform(0.0, 2.0 * kPi);
    }
    void accept(const State &, const Vec3 &v, Rng &) override { vz_ = v.z; }
    Vec3 heading() const override { return horizontal(psi_, 1.0); }

  private:
    double turned(Rng &rng) const
    {
        const double mag = deg2rad(rng.uniform(kMinTurnDeg, kMaxTurnDeg));
        return frame_heading_ + (rng.bernoulli(0.5) ? mag : -mag);
    }
    static constexpr double kMinTurnDeg = 60.0;
    static constexpr double kMaxTurnDeg = 120.0;
    RoadGraph graph_;
    double psi_ = 0.0, frame_heading_ = 0.0, speed_ = 0.0, vz_ = 0.0;
    int turn_frame_ = 1;
};

class HoverPlanner : public Planner {
  public:
    using Planner::Planner;
    bool start(Rng &rng, Vec3 &pos) override
    {
        vz_ = rng.uniform(-0.3, 0.3);
        return sample_free_point(ctx_, rng, ctx_.mode.altitude.lo + 1.0, ctx_.mode.altitude.hi - 1.0, pos);
    }
    void begin_frame(const State &st, Rng &rng) override
    {
        if (st.frame > 0)
            vz_ = std::clamp(vz_ + rng.normal(0.0, 0.1), -ctx_.mode.v_vert.hi, ctx_.mode.v_vert.hi);
    }
    Vec3 command(const State &) override { return {0.0, 0.0, vz_}; }
    void redraw(const State &, Rng &) override { vz_ = -vz_; }
    void accept(const State &, const Vec3 &v, Rng &) override { vz_ = v.z; }

  private:
    double vz_ = 0.0;
};

class StraightPlanner : public Planner {
  public:
    StraightPlanner(const Context &ctx, double speed_lo, double speed_hi)
        : Planner(ctx), speed_lo_(speed_lo), speed_hi_(speed_hi)
    {
    }
    bool start(Rng &rng, Vec3 &pos) override
    {
        speed_ = rng.uniform(speed_lo_, speed_hi_);
        if (!sample_free_point(ctx_, rng, ctx_.mode.altitude.lo + 1.0, ctx_.mode.altitude.hi - 1.0, pos))
            return false;
        const double reach = speed_ * ctx_.horizon();
        for (int i = 0; i < 64; ++i) {
            psi_ = rng.uniform(0.0, 2.0 * kPi);
            const Vec3 end = pos + horizontal(psi_, reach);
            if (ctx_.in_bounds(end) && ctx_.segment_clear(pos, end))
                return true;
        }
        return false;
    }
    Vec3 command(const State &) override { return horizontal(psi_, speed_); }
    void redraw(const State &, Rng &rng) override { psi_ = rng.uniform(0.0, 2.0 * kPi); }
    Vec3 heading() const override { return horizontal(psi_, 1.0); }

  private:
    double speed_lo_, speed_hi_;
    double speed_ = 0.0, psi_ = 0.0;
};

class OrbitPlanner : public Planner {
  public:
    using Planner::Planner;
    bool start(Rng &rng, Vec3 &pos) override
    {
        const auto &bs = ctx_.scene.buildings;
        const Building &b = bs[rng.uniform_index(bs.size())];
        const Rect &f = b.footprint;
        center_ = {0.5 * (f.x0 + f.x1), 0.5 * (f.y0 + f.y1), 0.0};
        radius_ = 0.5 * std::hypot(f.width(), f.depth()) + rng.uniform(4.0, 10.0);
        const Bounds &bd = ctx_.scene.bounds;
        const double m = ctx_.params.bounds_margin;
        if (center_.x - radius_ < bd.x0 + m || center_.x + radius_ > bd.x1 - m || center_.y - radius_ < bd.y0 + m ||
            center_.y + radius_ > bd.y1 - m)
            return false;
        const double speed = rng.uniform(3.0, 9.5);
        omega_ = speed / radius_ * (rng.bernoulli(0.5) ? 1.0 : -1.0);
        alpha_ = rng.uniform(0.0, 2.0 * kPi);
        z_ = rng.uniform(ctx_.mode.altitude.lo + 1.0, ctx_.mode.altitude.hi - 1.0);
        pos = point(alpha_);
        return true;
    }
    Vec3 command(const State &st) override
    {
        pending_ = alpha_ + omega_ * dt();
        Vec3 v = (point(pending_) - st.pos) / dt();
        v.z = 0.0;
        return v;
    }
    void redraw(const State &, Rng &) override { omega_ = -omega_; }
    void accept(const State &, const Vec3 &, Rng &) override { alpha_ = pending_; }
    Vec3 heading() const override { return {-std::sin(alpha_) * omega_, std::cos(alpha_) * omega_, 0.0}; }

  private:
    Vec3 point(double a) const { return {center_.x + radius_ * std::cos(a), center_.y + radius_ * std::sin(a), z_}; }
    Vec3 center_;
    double radius_ = 0.0, omega_ = 0.0, alpha_ = 0.0, pending_ = 0.0, z_ = 0.0;
};

std::unique_ptr<Planner> make_planner(const Context &ctx)
{
    switch (ctx.mode.name) {
    case ModeName::Zigzag: return std::make_unique<ZigzagPlanner>(ctx);
    case ModeName::WallHug: return std::make_unique<WallHugPlanner>(ctx);
    case ModeName::Inspect: return std::make_unique<InspectPlanner>(ctx);
    case ModeName::SuddenTurn: return std::make_unique<SuddenTurnPlanner>(ctx);
    case ModeName::StreetPatrol: return std::make_unique<StreetPatrolPlanner>(ctx);
    case ModeName::Hover: return std::make_unique<HoverPlanner>(ctx);
    case ModeName::CityCruise: return std::make_unique<StraightPlanner>(ctx, 9.0, 14.0);
    case ModeName::Orbit: return std::make_unique<OrbitPlanner>(ctx);
    case ModeName::FastTransit: return std::make_unique<StraightPlanner>(ctx, 16.0, 24.0);
    case ModeName::Scan: return std::make_unique<ScanPlanner>(ctx);
    }
    throw std::invalid_argument("unknown trajectory mode");
}

Vec3 clamp_to_envelope(Vec3 v, const TrajectoryMode &mode, const Vec3 &hint)
{
    const double sh = horizontal_norm(v);
    if (mode.v_horiz.hi <= 0.0) {
        v.x = v.y = 0.0;
    } else if (sh > mode.v_horiz.hi) {
        v.x *= mode.v_horiz.hi / sh;
        v.y *= mode.v_horiz.hi / sh;
    } else if (sh < mode.v_horiz.lo) {
        Vec3 d = sh > 1e-9 ? Vec3{v.x / sh, v.y / sh, 0.0} : Vec3{hint.x, hint.y, 0.0};
        const double dn = horizontal_norm(d);
        d = dn > 1e-12 ? d / dn : Vec3{1.0, 0.0, 0.0};
        v.x = d.x * mode.v_horiz.lo;
        v.y = d.y * mode.v_horiz.lo;
    }
    const double az = std::abs(v.z);
    if (az > mode.v_vert.hi)
        v.z = v.z < 0.0 ? -mode.v_vert.hi : mode.v_vert.hi;
    else if (az < mode.v_vert.lo)
        v.z = v.z < 0.0 ? -mode.v_vert.lo : mode.v_vert.lo;
    return v;
}

void altitude_guard(Vec3 &v, const Vec3 &pos, const TrajectoryMode &mode, double dt)
{
    if (mode.altitude.contains(pos.z + v.z * dt))
        return;
    v.z = -v.z;
    if (!mode.altitude.contains(pos.z + v.z * dt))
        v.z = 0.0;
}

} // namespace

std::string_view TrajectoryMode::label() const { return kModeLabels[static_cast<std::size_t>(id - 1)]; }

const std::array<TrajectoryMode, 10> &all_modes() { return kModes; }

const TrajectoryMode &mode_by_id(int id)
{
    if (id < 1 || id > 10)
        throw std::out_of_range("trajectory mode id " + std::to_string(id) + " outside [1, 10]");
    return kModes[static_cast<std::size_t>(id - 1)];
}

const TrajectoryMode &mode_by_name(std::string_view name)
{
    for (std::size_t i = 0; i < kModeLabels.size(); ++i)
        if (kModeLabels[i] == name)
            return kModes[i];
    throw std::out_of_range("unknown trajectory mode '" + std::string(name) + "'");
}

std::string_view to_string(Difficulty d) { return d == Difficulty::Hard ? "Hard" : "Easy"; }

Trajectory simulate_trajectory(const Scene &scene, const TrajectoryMode &mode, std::uint64_t seed, int frames,
                               double dt)
{
    TrajectoryParams p;
    p.frames = frames;
    p.dt = dt;
    return simulate_trajectory(scene, mode, seed, p);
}

Trajectory simulate_trajectory(const Scene &scene, const TrajectoryMode &mode, std::uint64_t seed,
                               const TrajectoryParams &params)
{
    if (params.frames < 2)
        throw std::invalid_argument("simulate_trajectory: T must be >= 2");
    if (!(params.dt > 0.0))
        throw std::invalid_argument("simulate_trajectory: dt must be positive");
    if (mode.id < 1 || mode.id > 10)
        throw std::invalid_argument("simulate_trajectory: invalid mode");
    const bool needs_building =
        mode.name == ModeName::WallHug || mode.name == ModeName::Inspect || mode.name == ModeName::Orbit;
    if (needs_building && scene.buildings.empty())
        throw ModeInfeasible(std::string(mode.label()) + " requires at least one building");
    if (mode.name == ModeName::StreetPatrol && scene.roads.empty())
        throw ModeInfeasible("StreetPatrol requires a road network");

    const Context ctx{scene, mode, params};
    Rng rng(derive_seed(seed, {0x7472616aULL, static_cast<std::uint64_t>(mode.id)}));
    for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
        auto planner = make_planner(ctx);
        Vec3 pos;
        if (!planner->start(rng, pos) || !ctx.point_clear(pos))
            continue;
        Trajectory traj;
        traj.mode = mode;
        traj.seed = seed;
        traj.dt = params.dt;
        traj.frames.reserve(static_cast<std::size_t>(params.frames));
        Vec3 v_prev;
        bool ok = true;
        for (int f = 0; f < params.frames && ok; ++f) {
            const State st{pos, v_prev, f};
            planner->begin_frame(st, rng);
            bool accepted = false;
            Vec3 v;
            for (int r = 0; r <= params.max_redraws; ++r) {
                v = clamp_to_envelope(planner->command(st), mode, planner->heading());
                altitude_guard(v, pos, mode, params.dt);
                const Vec3 next = pos + v * params.dt;
                if (ctx.point_clear(next) && ctx.segment_clear(pos, next)) {
                    accepted = true;
                    break;
                }
                planner->redraw(st, rng);
            }
            if (!accepted) {
                ok = false;
                break;
            }
            planner->accept(st, v, rng);
            traj.frames.push_back({f * params.dt, pos, v});
            pos = pos + v * params.dt;
            v_prev = v;
        }
        if (ok)
            return traj;
    }
    throw ModeInfeasible(std::string(mode.label()) + ": no collision-free trajectory after " +
                         std::to_string(params.max_attempts) + " attempts");
}

std::vector<Violation> validate_trajectory(const Scene &scene, const Trajectory &traj)
{
    std::vector<Violation> out;
    if (traj.frames.empty()) {
        out.push_back({-1, "time", "trajectory has no frames"});
        return out;
    }
    const TrajectoryMode &m = traj.mode;
    constexpr double tol = 1e-6;
    for (std::size_t i = 0; i < traj.frames.size(); ++i) {
        const Pose &p = traj.frames[i];
        const int f = static_cast<int>(i);
        if (std::abs(p.t - static_cast<double>(i) * traj.dt) > 1e-9 * std::max(1.0, p.t))
            out.push_back({f, "time", "t=" + std::to_string(p.t) + " expected " + std::to_string(i * traj.dt)});
        if (!m.altitude.contains(p.u.z, tol))
            out.push_back({f, "altitude", "z=" + std::to_string(p.u.z)});
        const double sh = horizontal_norm(p.v);
        if (!m.v_horiz.contains(sh, tol))
            out.push_back({f, "v_horiz", "|v_h|=" + std::to_string(sh)});
        if (!m.v_vert.contains(std::abs(p.v.z), tol))
            out.push_back({f, "v_vert", "|v_z|=" + std::to_string(std::abs(p.v.z))});
        if (const int b = scene.building_containing(p.u); b >= 0)
            out.push_back({f, "collision", "inside building " + std::to_string(b)});
        if (p.u.z < 0.0)
            out.push_back({f, "below_ground", "z=" + std::to_string(p.u.z)});
        if (!scene.bounds.contains_xy(p.u.x, p.u.y))
            out.push_back({f, "out_of_bounds", "x=" + std::to_string(p.u.x) + " y=" + std::to_string(p.u.y)});
    }
    return out;
}

double kinematic_residual(const Trajectory &traj)
{
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < traj.frames.size(); ++i) {
        const Pose &a = traj.frames[i], &b = traj.frames[i + 1];
        worst = std::max(worst, norm(b.u - a.u - a.v * traj.dt));
    }
    return worst;
}

double max_heading_change_deg(const Trajectory &traj)
{
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < traj.frames.size(); ++i) {
        const Vec3 a = traj.frames[i].v, b = traj.frames[i + 1].v;
        const double na = horizontal_norm(a), nb = horizontal_norm(b);
        if (na < 1e-9 || nb < 1e-9)
            continue;
        const double c = std::clamp((a.x * b.x + a.y * b.y) / (na * nb), -1.0, 1.0);
        worst = std::max(worst, rad2deg(std::acos(c)));
    }
    return worst;
}

nlohmann::json to_json(const Trajectory &traj)
{
    nlohmann::json frames = nlohmann::json::array();
    for (const auto &p : traj.frames)
        frames.push_back({{"t", p.t}, {"u", {p.u.x, p.u.y, p.u.z}}, {"v", {p.v.x, p.v.y, p.v.z}}});
    return {{"mode_id", traj.mode.id},
            {"mode", std::string(traj.mode.label())},
            {"difficulty", std::string(to_string(traj.mode.difficulty))},
            {"seed", traj.seed},
            {"dt", traj.dt},
            {"frames", frames}};
}

Trajectory trajectory_from_json(const nlohmann::json &doc)
{
    Trajectory t;
    t.mode = mode_by_id(doc.at("mode_id").get<int>());
    t.seed = doc.at("seed").get<std::uint64_t>();
    t.dt = doc.at("dt").get<double>();
    for (const auto &f : doc.at("frames")) {
        Pose p;
        p.t = f.at("t").get<double>();
        const auto &u = f.at("u");
        const auto &v = f.at("v");
        p.u = {u.at(0).get<double>(), u.at(1).get<double>(), u.at(2).get<double>()};
        p.v = {v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>()};
        t.frames.push_back(p);
    }
    return t;
}

} // namespace nff
