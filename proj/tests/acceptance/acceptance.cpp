/*
 * Copyright 2026 The TorusForge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Stand-alone acceptance run: one [PASS]/[FAIL] line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "cli/cli.hpp"
#include "support/oracles.hpp"
#include "torusforge/collectives.hpp"
#include "torusforge/ocs_fabric.hpp"
#include "torusforge/perfmodel.hpp"
#include "torusforge/scheduler.hpp"
#include "torusforge/sustain.hpp"
#include "torusforge/topology.hpp"

using namespace torusforge;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool condition, const std::string& what) {
    if (!condition) {
      if (ok) detail << "first failure: ";
      if (ok) detail << what;
      ok = false;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

cli::Context context() { return cli::Context::from_environment(); }

const ChipCatalog& catalog() {
  static const ChipCatalog c = ChipCatalog::load(context().catalog_path);
  return c;
}

std::string data(const std::string& rel) { return context().data_dir + "/" + rel; }

// 1 -------------------------------------------------------------------------
void cabling(Check& c) {
  const auto t0 = Clock::now();
  const auto plan = ocs::plan_cabling(64);
  c.expect(plan.ocs_count() == 48, "48 OCSes");
  for (int o = 0; o < 48; ++o) {
    c.expect(plan.used_ports(o) == 128, "128 used ports on OCS " + std::to_string(o));
    c.expect(plan.spare_ports(o) == 8, "8 spares on OCS " + std::to_string(o));
  }
  for (int b = 0; b < 64; ++b)
    for (int d = 0; d < 3; ++d)
      for (int i = 0; i < 16; ++i) {
        const auto& a = plan.at(b, d, i);
        c.expect(a.ocs == ocs::ocs_for(d, i) && a.plus_port != a.minus_port,
                 "+/- pair on one OCS");
      }
  c.expect(plan.total_fiber_pairs() == 3072, "3072 fiber pairs");
  const double dt = seconds_since(t0);
  c.expect(dt < 1.0, "under 1 s");
  c.detail << (c.ok ? "" : "; ") << "48 OCS x 128 used + 8 spare, " << plan.total_fiber_pairs()
           << " fiber pairs, " << fmt(dt, 3) << " s";
}

// 2 -------------------------------------------------------------------------
void goodput_anchors(Check& c) {
  const auto t0 = Clock::now();
  struct Anchor {
    std::int64_t slice;
    double p;
    double expected;
  };
  const Anchor anchors[] = {{1024, 0.99, 0.75}, {1024, 0.995, 0.75}, {2048, 0.995, 0.50},
                            {3072, 0.995, 0.75}};
  for (const auto& a : anchors) {
    const auto r = scheduler::goodput(a.slice, {a.p}, scheduler::GoodputMode::ocs, 10000, 1);
    const double exact = scheduler::exact_ocs_goodput(a.slice, {a.p});
    c.expect(std::abs(r.mean - a.expected) <= 0.02,
             std::to_string(a.slice) + "@" + fmt(a.p) + " = " + fmt(r.mean));
    // Rule of three: outcomes rarer than 3/trials can go unobserved.
    const double tol = 3.0 * r.std_error + 3.0 / 10000;
    c.expect(std::abs(r.mean - exact) <= tol,
             "MC within 3 SE of exact at " + std::to_string(a.slice) + "@" + fmt(a.p));
    c.detail << a.slice << "@" << a.p << "=" << fmt(r.mean, 4) << " (exact " << fmt(exact, 4)
             << ") ";
  }
  const double dt = seconds_since(t0);
  c.expect(dt < 10.0, "under 10 s");
  c.detail << fmt(dt, 3) << " s";
}

// 3 -------------------------------------------------------------------------
void ocs_dominance(Check& c) {
  const std::int64_t slices[] = {64, 128, 256, 512, 1024, 2048, 3072, 4096};
  const double ps[] = {0.99, 0.995, 0.999};
  int points = 0;
  for (auto s : slices) {
    for (double p : ps) {
      const auto o = scheduler::goodput(s, {p}, scheduler::GoodputMode::ocs, 10000, 1);
      const auto st = scheduler::goodput(s, {p}, scheduler::GoodputMode::static_wiring, 10000, 1);
      c.expect(o.mean >= st.mean, "mean ocs >= static at " + std::to_string(s) + "@" + fmt(p));
      for (std::uint64_t t = 0; t < 2000; ++t) {
        const auto tr = scheduler::simulate_trial(s, {p}, 1, t);
        if (tr.ocs_slices < tr.static_slices) {
          c.expect(false, "paired trial " + std::to_string(t));
          break;
        }
      }
      ++points;
    }
  }
  const auto r = scheduler::goodput(256, {0.999}, scheduler::GoodputMode::static_wiring, 10000, 1);
  const double target = std::pow(0.999, 64);
  c.expect(std::abs(r.mean - target) <= 0.01, "static 256@0.999 = " + fmt(r.mean));
  c.detail << (c.ok ? "" : "; ") << points << " grid points, static 256@0.999 = " << fmt(r.mean, 4)
           << " vs 0.999^64 = " << fmt(target, 4);
}

// 4 -------------------------------------------------------------------------
void bisection_band(Check& c) {
  for (int k = 2; k <= 4; ++k) {
    const int n = k * k * k * k * k * k;  // both a perfect cube and square
    const double cube = double(axis_cut_bisection({k * k, k * k, k * k}, {}));
    const double square = double(axis_cut_bisection({1, k * k * k, k * k * k}, {}));
    const double ratio = cube / square;
    c.expect(std::abs(ratio - std::pow(n, 1.0 / 6.0)) < 1e-12, "ratio = N^(1/6) at " + std::to_string(n));
    c.expect(ratio >= 2.0 && ratio <= 4.0, "within [2, 4]");
    if (n == 64) c.expect(ratio == 2.0, "exactly 2 at 64");
    if (n == 4096) c.expect(ratio == 4.0, "exactly 4 at 4096");
    c.detail << "N=" << n << ": " << fmt(ratio) << " ";
  }
}

// 5 -------------------------------------------------------------------------
void allreduce_factor(Check& c) {
  std::mt19937 rng(5);
  int cases = 0;
  for (int x = 1; x <= 16; x *= 2)
    for (int y = x; y <= 32; y *= 2)
      for (int z = y; z <= 64; z *= 2, ++cases) {
        for (double bytes : {1.0, 4096.0, 1e9, 3.7e11, double(rng())}) {
          const double off = collectives::allreduce_time({x, y, z}, bytes, {}, false).seconds;
          const double on = collectives::allreduce_time({x, y, z}, bytes, {}, true).seconds;
          if (x * y * z == 1) continue;
          c.expect(off / on == 2.0, "ratio 2 on " + SliceShape{x, y, z}.to_string());
        }
      }
  c.detail << cases << " shapes x 5 payloads, ratio 2.000";
}

// 6 -------------------------------------------------------------------------
void twisted_gains(Check& c) {
  const auto t0 = Clock::now();
  const double g448 = collectives::twisted_gain({4, 4, 8});
  const double g488 = collectives::twisted_gain({4, 8, 8});
  c.expect(g448 >= 1.63 && g448 <= 2.5, "4x4x8 gain " + fmt(g448));
  c.expect(g488 >= 1.31 && g488 <= 2.5, "4x8x8 gain " + fmt(g488));
  const auto twist = TwistSpec::parse("x->z:2,y->z:2");
  const auto regular = oracle::min_bisection(oracle::torus({2, 2, 4}));
  const auto twisted = oracle::min_bisection(oracle::torus({2, 2, 4}, twist.skews));
  c.expect(twisted >= regular, "2x2x4 twisted cut >= regular");
  c.expect(min_bisection_exact(build_torus({2, 2, 4}, twist)) == twisted, "library exact cut");
  const double dt = seconds_since(t0);
  c.expect(dt < 60.0, "under 60 s");
  c.detail << "4x4x8 " << fmt(g448, 4) << ", 4x8x8 " << fmt(g488, 4) << ", 2x2x4 cut " << twisted
           << " vs " << regular << ", " << fmt(dt, 3) << " s";
}

// 7 -------------------------------------------------------------------------
double hop_weighted(const oracle::Graph& g, double bytes) {
  double total = 0.0;
  for (int s = 0; s < g.n; ++s) {
    std::vector<int> d(g.n, -1);
    std::queue<int> q;
    d[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : g.adj[u]) {
        if (d[v] < 0) {
          d[v] = d[u] + 1;
          q.push(v);
        }
      }
    }
    for (int v = 0; v < g.n; ++v) total += bytes * d[v];
  }
  return total;
}

void routing_conservation(Check& c) {
  std::mt19937 rng(2026);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int kind = i % 3;
    SliceShape s;
    TwistSpec t;
    if (kind == 1) {
      const SliceShape twistable[] = {{4, 4, 8}, {4, 8, 8}, {2, 2, 4}, {2, 4, 4}};
      s = twistable[rng() % 4];
      t = s.x == 4 ? TwistSpec::standard(s)
                   : (s.y == s.x ? TwistSpec::parse("x->z:2,y->z:2") : TwistSpec::parse("x->y:2,x->z:2"));
    } else {
      do {
        s = {1 + int(rng() % 8), 1 + int(rng() % 8), 2 + int(rng() % 8)};
      } while (s.chips() > 512);
    }
    const double bytes = 1.0 + (rng() % 1000);
    const bool mesh = kind == 2;
    const auto g = mesh ? build_mesh(s) : build_torus(s, t);
    const auto ref = mesh ? oracle::mesh(s) : oracle::torus(s, t.skews);
    const auto loads = all_to_all_link_loads(g, bytes, {LoadMethod::exhaustive, 0});
    const double expected = hop_weighted(ref, bytes);
    const double err = std::abs(loads.total_load - expected) / expected;
    worst = std::max(worst, err);
    c.expect(err <= 1e-9, "conservation on " + s.to_string());
  }
  c.detail << (c.ok ? "" : "; ") << "20 graphs, worst relative error " << fmt(worst, 3);
}

// 8 -------------------------------------------------------------------------
void routing_only_twist(Check& c) {
  const auto plan = ocs::plan_cabling(64);
  int verified = 0;
  for (int x = 1; x <= 2; ++x)
    for (int y = x; y <= 2; ++y)
      for (int z = y; z <= 2; ++z) {
        const SliceShape grid{x, y, z};
        std::vector<int> blocks;
        for (int b = 0; b < grid.chips(); ++b) blocks.push_back(63 - 5 * b);
        const auto before = plan;
        const auto regular = ocs::configure_slice(plan, blocks, grid, {});
        c.expect(bool(ocs::verify_crossconnect(plan, regular)), "regular " + grid.to_string());
        ++verified;
        if (!is_twistable(grid.scaled(4))) continue;
        const auto twisted =
            ocs::configure_slice(plan, blocks, grid, TwistSpec::standard(grid.scaled(4)));
        c.expect(bool(ocs::verify_crossconnect(plan, twisted)), "twisted " + grid.to_string());
        ++verified;
        c.expect(plan == before, "cabling unchanged");
        bool differs = false;
        for (std::size_t o = 0; o < regular.settings.size(); ++o) {
          std::set<int> ports_r, ports_t;
          for (auto [i, j] : regular.settings[o].connections) { ports_r.insert(i); ports_r.insert(j); }
          for (auto [i, j] : twisted.settings[o].connections) { ports_t.insert(i); ports_t.insert(j); }
          c.expect(ports_r == ports_t, "same ports on OCS " + std::to_string(o));
          differs |= regular.settings[o] != twisted.settings[o];
        }
        c.expect(differs, "permutation differs for " + grid.to_string());
      }
  c.detail << (c.ok ? "" : "; ") << verified << " cross-connects isomorphic to target";
}

// 9 -------------------------------------------------------------------------
void classification(Check& c) {
  using SC = scheduler::ShapeClass;
  const std::vector<std::pair<SliceShape, SC>> table{
      {{1, 1, 1}, SC::SubBlockMesh},    {{1, 1, 2}, SC::SubBlockMesh},
      {{1, 2, 2}, SC::SubBlockMesh},    {{2, 2, 2}, SC::SubBlockMesh},
      {{2, 2, 4}, SC::SubBlockMesh},    {{2, 4, 4}, SC::SubBlockMesh},
      {{4, 4, 4}, SC::RegularTorus},    {{4, 4, 8}, SC::TwistableTorus},
      {{4, 8, 8}, SC::TwistableTorus},  {{4, 4, 12}, SC::RegularTorus},
      {{4, 4, 16}, SC::RegularTorus},   {{4, 8, 12}, SC::RegularTorus},
      {{8, 8, 16}, SC::TwistableTorus}, {{4, 16, 16}, SC::RegularTorus},
      {{8, 8, 8}, SC::RegularTorus},    {{4, 4, 64}, SC::RegularTorus},
      {{4, 8, 16}, SC::RegularTorus},   {{4, 8, 32}, SC::RegularTorus},
      {{4, 4, 32}, SC::RegularTorus},   {{8, 12, 16}, SC::RegularTorus},
      {{8, 8, 12}, SC::RegularTorus},   {{4, 4, 96}, SC::RegularTorus},
      {{8, 8, 24}, SC::RegularTorus},   {{8, 16, 16}, SC::TwistableTorus},
      {{12, 16, 16}, SC::RegularTorus}, {{4, 4, 192}, SC::RegularTorus}};
  for (const auto& [shape, expected] : table) {
    c.expect(scheduler::validate_shape(shape) == expected, "class of " + shape.to_string());
  }
  const auto plan = ocs::plan_cabling(64);
  std::vector<int> healthy;
  for (int b = 0; b < 64; ++b) healthy.push_back(b);
  const auto a = scheduler::allocate({{4, 4, 12}, false}, healthy, plan);
  c.expect(a.cross_connect && a.cross_connect->chip_shape().chips() == 192, "192-chip slice");
  c.expect(a.cross_connect && bool(ocs::verify_crossconnect(plan, *a.cross_connect)),
           "4x4x12 cross-connect verifies");
  c.detail << (c.ok ? "" : "; ") << table.size() << " shapes classified, 4x4x12 allocated on "
           << a.blocks.size() << " blocks";
}

// 10 ------------------------------------------------------------------------
void search_space(Check& c) {
  const auto& v4 = catalog().at("tpu_v4");
  const auto w = perf::EmbeddingWorkload::load(data("workloads/llm_512.json"));
  const auto ranked = perf::search_best_config(512, w, v4);
  std::set<SliceShape> shapes;
  for (const auto& r : ranked) shapes.insert(r.shape);
  c.expect(shapes == std::set<SliceShape>{{4, 4, 32}, {4, 8, 16}, {8, 8, 8}}, "shape set");
  const double best = ranked.empty() ? 0.0 : ranked.front().estimate.throughput;
  const perf::ParallelismSpec novice{1, 1, 16, 32, perf::Partitioning::p2D_2D};
  const perf::ParallelismSpec expert{8, 1, 8, 8, perf::Partitioning::p2D_2D};
  const double tn =
      perf::estimate_dense_throughput(w, perf::map_parallelism({4, 8, 16}, novice), v4).throughput;
  const double te =
      perf::estimate_dense_throughput(w, perf::map_parallelism({8, 8, 8}, expert), v4).throughput;
  c.expect(best >= tn && best >= te, "best >= novice and expert");
  c.detail << (c.ok ? "" : "; ") << ranked.size() << " candidates over 3 shapes; best "
           << fmt(best, 4) << " >= novice " << fmt(tn, 4) << ", expert " << fmt(te, 4);
}

// 11 ------------------------------------------------------------------------
void roofline(Check& c) {
  const auto& v4 = catalog().at("tpu_v4");
  const auto& a100 = catalog().at("a100");
  c.expect(perf::roofline(v4, 1000) == 275e12, "attainable(tpu_v4, 1000)");
  c.expect(perf::ridge_point(v4) == 275e12 / 1200e9, "ridge(tpu_v4)");
  c.expect(perf::ridge_point(a100) == 312e12 / 2039e9, "ridge(a100)");
  c.expect(std::abs(perf::ridge_point(v4) - 229.2) < 0.05, "229.2");
  c.expect(std::abs(perf::ridge_point(a100) - 153.0) < 0.05, "153.0");
  c.detail << (c.ok ? "" : "; ") << "275e12, ridge v4 " << fmt(perf::ridge_point(v4), 5)
           << ", a100 " << fmt(perf::ridge_point(a100), 5);
}

// 12 ------------------------------------------------------------------------
void co2e(Check& c) {
  const sustain::FourMInputs in{1.0, 2.0, 1.57, 1.10, 0.475, 0.074};
  const double e = sustain::energy_ratio(in);
  const double q = sustain::co2e_ratio(e, in);
  c.expect(std::abs(e - 2.8545454545) < 1e-9, "energy ratio");
  c.expect(std::abs(e - 2.85) / 2.85 <= 0.005, "energy within 0.5% of 2.85");
  c.expect(std::abs(q - 18.3) / 18.3 <= 0.005, "co2e within 0.5% of 18.3");
  c.detail << (c.ok ? "" : "; ") << "energy " << fmt(e, 6) << ", co2e " << fmt(q, 6);
}

// 13 ------------------------------------------------------------------------
void embedding(Check& c) {
  const auto& v4 = catalog().at("tpu_v4");
  const perf::ModelConstants k = perf::ModelConstants::load(data("model_constants.json"));
  auto step = [&](const perf::EmbeddingWorkload& w, const SliceShape& s, const ChipSpec& chip) {
    return perf::embedding_step_time(w, {}, s, {}, chip, k.host_dram_bw, chip.chips_per_host, k);
  };
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const SliceShape shapes[] = {{4, 4, 4}, {4, 4, 8}, {4, 8, 8}, {8, 8, 8}, {8, 8, 16}};
  for (int i = 0; i < 500; ++i) {
    perf::EmbeddingWorkload w;
    w.global_batch = 1 + static_cast<std::int64_t>(u(rng) * 1e6);
    w.dedup = 1.0 + 4.0 * u(rng);
    w.dense_flops_per_sample = 1e10 * u(rng);
    for (int t = 0, n = 1 + int(rng() % 30); t < n; ++t) {
      w.tables.push_back({1 + std::int64_t(rng() % 10000000), 1 + std::int64_t(rng() % 512),
                          100.0 * u(rng), 1 + int(rng() % 3)});
    }
    const SliceShape s = shapes[rng() % 5];
    const auto r = step(w, s, v4);
    c.expect(r.step_seconds == std::max(r.sparse_time, r.dense_time), "max identity");
    ChipSpec wide = v4;
    wide.ici_bw *= 1.0 + u(rng);
    c.expect(step(w, s, wide).sparse_time <= r.sparse_time, "monotone in bisection");
    auto dd = w;
    dd.dedup *= 1.0 + u(rng);
    c.expect(step(dd, s, v4).sparse_time <= r.sparse_time, "monotone in dedup");
  }
  const auto ml = perf::EmbeddingWorkload::load(data("workloads/dlrm_mlperf.json"));
  auto prod = perf::EmbeddingWorkload::load(data("workloads/dlrm_production.json"));
  auto tput = [&](const perf::EmbeddingWorkload& w, const SliceShape& s) {
    return double(w.global_batch) / step(w, s, v4).step_seconds;
  };
  const double ml_speedup = tput(ml, {4, 8, 8}) / tput(ml, {4, 4, 8});
  auto prod256 = prod;
  prod256.global_batch *= 2;
  const double prod_speedup = tput(prod256, {4, 8, 8}) / tput(prod, {4, 4, 8});
  c.expect(ml_speedup < prod_speedup, "MLPerf-like saturates earlier");
  const double hbm = step(prod, {4, 4, 8}, v4).sparse_time;
  const double host = perf::embedding_step_time(prod, {{}, perf::Placement::host_cpu}, {4, 4, 8},
                                                {}, v4, k.host_dram_bw, v4.chips_per_host, k)
                          .sparse_time;
  c.expect(host / hbm > 2.0, "host placement sparse ratio " + fmt(host / hbm));
  c.detail << (c.ok ? "" : "; ") << "500 random cases; 128->256 speedup MLPerf-like "
           << fmt(ml_speedup, 4) << " < production-like " << fmt(prod_speedup, 4)
           << "; host/HBM sparse " << fmt(host / hbm, 4);
}

// 14 ------------------------------------------------------------------------
void determinism(Check& c) {
  const std::vector<std::vector<std::string>> commands{
      {"goodput", "--slice", "1024", "--availability", "0.99", "--trials", "10000", "--seed", "7"},
      {"goodput", "--sweep", "--trials", "1000", "--seed", "11"},
      {"search", "--chips", "512", "--workload", data("workloads/llm_512.json")},
      {"collective", "--op", "alltoall", "--shape", "8x8x16", "--twist", "standard", "--bytes", "1"},
      {"embed", "--config", data("embed/production_host.json")}};
  for (const auto& base : commands) {
    std::string reference;
    for (int repeat = 0; repeat < 2; ++repeat) {
      for (const char* threads : {"1", "4", "16"}) {
        std::vector<std::string> args{"--threads", threads};
        args.insert(args.end(), base.begin(), base.end());
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        c.expect(code == 0, base[0] + ": " + err.str());
        if (reference.empty()) reference = out.str();
        c.expect(out.str() == reference, base[0] + " differs at threads=" + threads);
      }
    }
  }
  c.detail << (c.ok ? "" : "; ") << commands.size() << " commands x 2 runs x threads {1,4,16}";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"cabling arithmetic", cabling},
      {"goodput anchors", goodput_anchors},
      {"OCS dominance over static wiring", ocs_dominance},
      {"3D/2D bisection band", bisection_band},
      {"torus/mesh all-reduce factor", allreduce_factor},
      {"twisted-torus gains", twisted_gains},
      {"routing conservation", routing_conservation},
      {"twist by switch routing only", routing_only_twist},
      {"slice classification", classification},
      {"search-space completeness", search_space},
      {"roofline", roofline},
      {"CO2e arithmetic", co2e},
      {"embedding model properties", embedding},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check check;
    try {
      criteria[i].second(check);
    } catch (const std::exception& e) {
      check.ok = false;
      check.detail << " exception: " << e.what();
    }
    failed += check.ok ? 0 : 1;
    std::cout << (check.ok ? "[PASS] " : "[FAIL] ") << (i + 1) << ": " << criteria[i].first
              << " - " << check.detail.str() << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
