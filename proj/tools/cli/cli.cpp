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

#include "cli/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "torusforge/chip.hpp"
#include "torusforge/collectives.hpp"
#include "torusforge/error.hpp"
#include "torusforge/ocs_fabric.hpp"
#include "torusforge/perfmodel.hpp"
#include "torusforge/scheduler.hpp"
#include "torusforge/sustain.hpp"
#include "torusforge/topology.hpp"

namespace torusforge::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_text(const std::string& path, std::string_view what) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + std::string(what) + " '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json read_json(const std::string& path, std::string_view what) {
  const std::string text = read_text(path, what);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string(what) + " '" + path + "' is not valid JSON: " + e.what());
  }
}

const json& require(const json& inputs, const char* key) {
  if (!inputs.contains(key) || inputs.at(key).is_null()) {
    throw ValidationError(std::string("missing input '") + key + "'");
  }
  return inputs.at(key);
}

template <typename T>
T get(const json& inputs, const char* key) {
  try {
    return require(inputs, key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("input '") + key + "' has the wrong type");
  }
}

std::string display(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.3g", value);
  return buffer;
}

TwistSpec resolve_twist(const std::string& text, const SliceShape& shape) {
  if (text == "standard" || text == "twisted") return TwistSpec::standard(shape);
  return TwistSpec::parse(text);
}

ChipCatalog catalog(const Context& context) { return ChipCatalog::load(context.catalog_path); }

std::string data_file(const Context& context, const char* name) {
  return (fs::path(context.data_dir) / name).string();
}

perf::ModelConstants constants_from(const json& inputs) {
  return perf::ModelConstants::parse(require(inputs, "model_constants").dump());
}

perf::EmbeddingWorkload workload_from(const json& inputs) {
  return perf::EmbeddingWorkload::parse(require(inputs, "workload").dump());
}

// ---- commands --------------------------------------------------------------

json do_classify(const json& in) {
  const SliceShape shape = SliceShape::parse(get<std::string>(in, "shape"));
  const auto cls = scheduler::validate_shape(shape);
  return {{"class", std::string(scheduler::to_string(cls))},
          {"shape", shape.to_string()},
          {"chips", shape.chips()},
          {"twistable", cls == scheduler::ShapeClass::TwistableTorus}};
}

json do_roofline(const json& in, const Context& context) {
  const ChipCatalog cat = catalog(context);
  const ChipSpec& chip = cat.at(get<std::string>(in, "chip"));
  const double oi = get<double>(in, "oi");
  const double ridge = perf::ridge_point(chip);
  return {{"attainable_flops", perf::roofline(chip, oi)},
          {"ridge_point", ridge},
          {"peak_flops", chip.peak_flops},
          {"hbm_bw", *chip.hbm_bw},
          {"memory_bound", oi < ridge}};
}

json do_co2e(const json& in) {
  sustain::FourMInputs f;
  f.model_factor = get<double>(in, "model_factor");
  f.machine_ratio = get<double>(in, "machine_ratio");
  f.pue_reference = get<double>(in, "pue_reference");
  f.pue_subject = get<double>(in, "pue_subject");
  f.ci_reference = get<double>(in, "ci_reference");
  f.ci_subject = get<double>(in, "ci_subject");
  const double energy = sustain::energy_ratio(f);
  const double co2e = sustain::co2e_ratio(energy, f);
  return {{"energy_ratio", energy},
          {"co2e_ratio", co2e},
          {"display", {{"energy_ratio", display(energy)}, {"co2e_ratio", display(co2e)}}}};
}

json goodput_point(std::int64_t slice, double p, int hosts, std::int64_t trials,
                   std::uint64_t seed, const std::string& mode, unsigned threads) {
  scheduler::AvailabilityModel model{p, hosts, true};
  json row = {{"slice_chips", slice}, {"host_availability", p}};
  double cap = 0.0;
  if (mode == "ocs" || mode == "both") {
    const auto r = scheduler::goodput(slice, model, scheduler::GoodputMode::ocs, trials, seed, threads);
    row["ocs"] = {{"mean", r.mean}, {"std_error", r.std_error}};
    row["exact_ocs"] = scheduler::exact_ocs_goodput(slice, model);
    cap = r.cap;
  }
  if (mode == "static" || mode == "both") {
    const auto r = scheduler::goodput(slice, model, scheduler::GoodputMode::static_wiring, trials,
                                      seed, threads);
    row["static"] = {{"mean", r.mean}, {"std_error", r.std_error}};
    cap = r.cap;
  }
  if (mode != "ocs" && mode != "static" && mode != "both") {
    throw ValidationError("mode must be ocs, static or both");
  }
  row["cap"] = cap;
  return row;
}

json do_goodput(const json& in, const Context& context) {
  const auto trials = get<std::int64_t>(in, "trials");
  const auto seed = get<std::uint64_t>(in, "seed");
  const int hosts = get<int>(in, "hosts");
  const auto mode = get<std::string>(in, "mode");
  if (in.value("sweep", false)) {
    json rows = json::array();
    for (auto slice : get<std::vector<std::int64_t>>(in, "slices")) {
      for (double p : get<std::vector<double>>(in, "availabilities")) {
        rows.push_back(goodput_point(slice, p, hosts, trials, seed, mode, context.threads));
      }
    }
    return {{"rows", rows}};
  }
  return goodput_point(get<std::int64_t>(in, "slice"), get<double>(in, "availability"), hosts,
                       trials, seed, mode, context.threads);
}

json do_collective(const json& in, const Context& context) {
  const SliceShape shape = SliceShape::parse(get<std::string>(in, "shape"));
  const auto op = get<std::string>(in, "op");
  const double bytes = get<double>(in, "bytes");
  const collectives::LinkParams link{get<double>(in, "link_bandwidth"), 1};
  const TwistSpec twist = resolve_twist(get<std::string>(in, "twist"), shape);
  json out = {{"op", op}};
  if (op == "allreduce") {
    bool wrap = shape.is_block_granular();
    if (in.contains("wraparound") && !in.at("wraparound").is_null()) {
      wrap = get<bool>(in, "wraparound");
    }
    const auto t = collectives::allreduce_time(shape, bytes, link, wrap);
    out["seconds"] = t.seconds;
    out["limiting"] = std::string(collectives::to_string(t.limiting));
    out["wraparound"] = wrap;
  } else if (op == "alltoall") {
    const InterconnectGraph graph = build_topology(shape, twist, link.bandwidth);
    const auto t = collectives::alltoall_time(graph, bytes, link, context.threads);
    const auto metrics = path_metrics(graph, context.threads);
    out["seconds"] = t.seconds;
    out["limiting"] = std::string(collectives::to_string(t.limiting));
    out["max_link_load"] = t.seconds * link.bandwidth;
    out["diameter"] = metrics.diameter;
    out["mean_distance"] = metrics.mean_distance;
    if (!graph.is_mesh()) {
      out["bisection_links"] = axis_cut_bisection(shape, twist);
      out["bisection_bound_seconds"] =
          collectives::alltoall_bisection_bound(shape, twist, bytes, link);
    }
  } else if (op == "twist-gain") {
    out["gain"] = collectives::twisted_gain(shape, context.threads);
    out["twist"] = TwistSpec::standard(shape).to_string();
  } else {
    throw ValidationError("op must be allreduce, alltoall or twist-gain");
  }
  out["twist"] = out.value("twist", twist.to_string());
  return out;
}

json do_plan(const json& in, const Context& context) {
  const int n_blocks = get<int>(in, "blocks");
  const ocs::CablingPlan plan = ocs::plan_cabling(n_blocks);
  json out;
  out["cabling"] = {{"blocks", n_blocks},
                    {"ocs_count", plan.ocs_count()},
                    {"used_ports_per_ocs", plan.used_ports(0)},
                    {"spare_ports_per_ocs", plan.spare_ports(0)},
                    {"fiber_pairs", plan.total_fiber_pairs()},
                    {"used_ports_total", plan.total_used_ports()}};
  if (!in.contains("shape") || in.at("shape").is_null()) return out;

  const SliceShape shape = SliceShape::parse(get<std::string>(in, "shape"));
  const auto cls = scheduler::validate_shape(shape);
  const std::string twist_text = get<std::string>(in, "twist");
  const bool twisted = twist_text != "none";
  if (twisted && twist_text != "standard") {
    throw ValidationError("plan accepts twist 'none' or 'standard'");
  }
  std::vector<int> healthy;
  if (in.contains("healthy") && !in.at("healthy").is_null()) {
    healthy = get<std::vector<int>>(in, "healthy");
  } else {
    for (int b = 0; b < n_blocks; ++b) healthy.push_back(b);
  }
  const auto alloc = scheduler::allocate({shape, twisted}, healthy, plan);
  const TwistSpec twist = twisted ? TwistSpec::standard(shape) : TwistSpec::none();
  const InterconnectGraph graph = build_topology(shape, twist);
  const auto metrics = path_metrics(graph, context.threads);

  json slice = {{"shape", shape.to_string()},
                {"class", std::string(scheduler::to_string(cls))},
                {"chips", shape.chips()},
                {"blocks", alloc.blocks},
                {"block_grid", alloc.block_grid.to_string()},
                {"twist", twist.to_string()},
                {"links", graph.undirected_link_count()},
                {"diameter", metrics.diameter},
                {"mean_distance", metrics.mean_distance}};
  slice["bisection_links"] =
      graph.is_mesh() ? axis_cut_bisection_mesh(shape) : axis_cut_bisection(shape, twist);
  if (alloc.cross_connect) {
    const auto verdict = ocs::verify_crossconnect(plan, *alloc.cross_connect);
    std::size_t connections = 0;
    for (const auto& s : alloc.cross_connect->settings) connections += s.connections.size();
    slice["verified"] = verdict.ok;
    slice["diagnostics"] = verdict.diagnostics;
    slice["ocs_connections"] = connections;
    if (in.value("full", false)) slice["cross_connect"] = json::parse(ocs::to_json(*alloc.cross_connect));
  } else {
    slice["verified"] = true;
    slice["diagnostics"] = json::array();
    slice["ocs_connections"] = 0;
  }
  out["slice"] = slice;
  return out;
}

json estimate_json(const perf::DenseEstimate& e) {
  return {{"throughput", e.throughput},       {"step_seconds", e.step_seconds},
          {"compute", e.compute},             {"data_parallel", e.data_parallel},
          {"model_parallel", e.model_parallel}, {"bubble_fraction", e.bubble_fraction}};
}

json candidate_json(const SliceShape& shape, const perf::ParallelismSpec& spec,
                    const perf::DenseEstimate& e) {
  return {{"shape", shape.to_string()},
          {"partition", {spec.pipeline, spec.data, spec.model1, spec.model2}},
          {"partitioning", std::string(perf::to_string(spec.partitioning))},
          {"estimate", estimate_json(e)}};
}

json do_search(const json& in, const Context& context) {
  const ChipCatalog cat = catalog(context);
  const ChipSpec& chip = cat.at(get<std::string>(in, "chip"));
  const auto workload = workload_from(in);
  const auto constants = constants_from(in);
  const auto n = get<std::int64_t>(in, "chips");
  const auto top = get<std::int64_t>(in, "top");
  if (top < 1) throw ValidationError("top must be at least 1");

  const auto ranked = perf::search_best_config(n, workload, chip, constants, context.threads);
  if (ranked.empty()) throw ValidationError("no mappable configuration for " + std::to_string(n) + " chips");
  json shapes = json::array();
  for (const auto& s : perf::enumerate_block_shapes(n)) shapes.push_back(s.to_string());
  json ranking = json::array();
  for (std::size_t i = 0; i < ranked.size() && static_cast<std::int64_t>(i) < top; ++i) {
    json row = candidate_json(ranked[i].shape, ranked[i].spec, ranked[i].estimate);
    row["rank"] = i + 1;
    ranking.push_back(row);
  }
  json baselines = json::array();
  if (in.contains("baselines") && !in.at("baselines").is_null()) {
    for (const auto& b : in.at("baselines")) {
      const SliceShape shape = SliceShape::parse(get<std::string>(b, "shape"));
      const auto f = get<std::vector<std::int64_t>>(b, "partition");
      if (f.size() != 4) throw ValidationError("baseline partition needs four factors");
      const perf::ParallelismSpec spec{f[0], f[1], f[2], f[3],
                                       perf::parse_partitioning(get<std::string>(b, "partitioning"))};
      const auto e = perf::estimate_dense_throughput(workload, perf::map_parallelism(shape, spec),
                                                     chip, constants);
      baselines.push_back(candidate_json(shape, spec, e));
    }
  }
  return {{"shapes", shapes},
          {"candidates", ranked.size()},
          {"best", ranking.at(0)},
          {"ranking", ranking},
          {"baselines", baselines}};
}

json do_embed(const json& in, const Context& context) {
  const ChipCatalog cat = catalog(context);
  const ChipSpec& chip = cat.at(get<std::string>(in, "chip"));
  const auto workload = workload_from(in);
  const auto constants = constants_from(in);
  const SliceShape shape = SliceShape::parse(get<std::string>(in, "shape"));
  const TwistSpec twist = resolve_twist(get<std::string>(in, "twist"), shape);

  perf::ShardingStrategy strategy;
  strategy.placement = perf::parse_placement(get<std::string>(in, "placement"));
  const json& sharding = require(in, "sharding");
  if (sharding.is_string()) {
    strategy.per_table.assign(workload.tables.size(),
                              perf::parse_table_sharding(sharding.get<std::string>()));
  } else {
    for (const auto& s : sharding) {
      if (!s.is_string()) throw ValidationError("sharding entries must be strings");
      strategy.per_table.push_back(perf::parse_table_sharding(s.get<std::string>()));
    }
  }
  double host_bw = constants.host_dram_bw;
  if (in.contains("host_dram_bw") && !in.at("host_dram_bw").is_null()) {
    host_bw = get<double>(in, "host_dram_bw");
  }
  int per_host = chip.chips_per_host;
  if (in.contains("chips_per_host") && !in.at("chips_per_host").is_null()) {
    per_host = get<int>(in, "chips_per_host");
  }
  const auto r = perf::embedding_step_time(workload, strategy, shape, twist, chip, host_bw,
                                           per_host, constants);
  return {{"step_seconds", r.step_seconds},
          {"sparse_time", r.sparse_time},
          {"dense_time", r.dense_time},
          {"throughput", static_cast<double>(workload.global_batch) / r.step_seconds},
          {"bound", r.sparse_time >= r.dense_time ? "sparse" : "dense"},
          {"breakdown",
           {{"hbm_time", r.hbm_time},
            {"net_time", r.net_time},
            {"overhead", r.overhead},
            {"lookup_bytes", r.lookup_bytes},
            {"bisection_bw", r.bisection_bw}}}};
}

// ---- CSV -------------------------------------------------------------------

std::string num(const json& v) { return v.is_null() ? "" : v.dump(); }

std::string goodput_csv(const json& outputs) {
  std::ostringstream out;
  out << "slice_chips,host_availability,ocs_goodput,ocs_std_error,static_goodput,"
         "static_std_error,exact_ocs_goodput,cap\n";
  for (const auto& r : outputs.at("rows")) {
    const json none;
    const json& o = r.contains("ocs") ? r.at("ocs") : none;
    const json& s = r.contains("static") ? r.at("static") : none;
    out << num(r.at("slice_chips")) << ',' << num(r.at("host_availability")) << ','
        << (o.is_null() ? "" : num(o.at("mean"))) << ','
        << (o.is_null() ? "" : num(o.at("std_error"))) << ','
        << (s.is_null() ? "" : num(s.at("mean"))) << ','
        << (s.is_null() ? "" : num(s.at("std_error"))) << ','
        << num(r.value("exact_ocs", json())) << ',' << num(r.at("cap")) << '\n';
  }
  return out.str();
}

std::string search_csv(const json& outputs) {
  std::ostringstream out;
  out << "rank,shape,pipeline,data,model1,model2,partitioning,throughput,step_seconds,"
         "compute,data_parallel,model_parallel,bubble_fraction\n";
  for (const auto& r : outputs.at("ranking")) {
    const auto& p = r.at("partition");
    const auto& e = r.at("estimate");
    out << num(r.at("rank")) << ',' << r.at("shape").get<std::string>() << ',' << num(p[0]) << ','
        << num(p[1]) << ',' << num(p[2]) << ',' << num(p[3]) << ','
        << r.at("partitioning").get<std::string>() << ',' << num(e.at("throughput")) << ','
        << num(e.at("step_seconds")) << ',' << num(e.at("compute")) << ','
        << num(e.at("data_parallel")) << ',' << num(e.at("model_parallel")) << ','
        << num(e.at("bubble_fraction")) << '\n';
  }
  return out.str();
}

bool env_set(const char* name, std::string& value) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return false;
  value = v;
  return true;
}

}  // namespace

std::string tool_version() { return TORUSFORGE_VERSION; }

Context Context::from_environment() {
  Context c;
  if (!env_set("TORUSFORGE_DATA", c.data_dir)) {
    c.data_dir = TORUSFORGE_SOURCE_DATA_DIR;
    if (!fs::exists(fs::path(c.data_dir) / "chips.json") &&
        fs::exists(fs::path(TORUSFORGE_INSTALL_DATA_DIR) / "chips.json")) {
      c.data_dir = TORUSFORGE_INSTALL_DATA_DIR;
    }
  }
  if (!env_set("TORUSFORGE_CATALOG", c.catalog_path)) {
    c.catalog_path = (fs::path(c.data_dir) / "chips.json").string();
  }
  return c;
}

json execute(const std::string& command, const json& inputs, const Context& context) {
  if (!inputs.is_object()) throw ValidationError("inputs must be a JSON object");
  if (command == "classify") return do_classify(inputs);
  if (command == "roofline") return do_roofline(inputs, context);
  if (command == "co2e") return do_co2e(inputs);
  if (command == "goodput") return do_goodput(inputs, context);
  if (command == "collective") return do_collective(inputs, context);
  if (command == "plan") return do_plan(inputs, context);
  if (command == "search") return do_search(inputs, context);
  if (command == "embed") return do_embed(inputs, context);
  throw ValidationError("unknown command '" + command + "'");
}

json make_report(const std::string& command, const json& inputs, const json& outputs) {
  json seeds = json::array();
  if (inputs.contains("seed")) seeds.push_back(inputs.at("seed"));
  return {{"command", command},
          {"inputs", inputs},
          {"outputs", outputs},
          {"seeds", seeds},
          {"tool_version", tool_version()}};
}

namespace {

struct Options {
  std::string out_path;
  bool csv = false;
  unsigned threads = 0;
  std::string catalog;
  std::string data_dir;

  std::string shape;
  std::string twist = "none";
  std::string chip = "tpu_v4";

  int blocks = ocs::kMaxBlocks;
  std::vector<int> healthy;
  bool full = false;

  std::int64_t slice = 0;
  double availability = 0.0;
  std::string mode = "both";
  std::int64_t trials = 10000;
  std::uint64_t seed = 1;
  int hosts = ocs::kMaxBlocks * ocs::kHostsPerBlock;
  bool sweep = false;
  std::vector<std::int64_t> slices{64, 128, 256, 512, 1024, 2048, 3072, 4096};
  std::vector<double> availabilities{0.99, 0.995, 0.999};

  std::string op = "allreduce";
  double bytes = 0.0;
  double link_gbps = kDefaultLinkBandwidth / 1e9;
  std::string wraparound = "auto";

  std::int64_t chips = 0;
  std::string workload_path;
  std::string constants_path;
  std::int64_t top = 10;
  std::vector<std::string> baselines;

  std::string config_path;
  std::string placement;

  double oi = 0.0;

  std::optional<double> model_factor, machine_ratio, pue_ref, pue_sub, ci_ref, ci_sub;
};

// "4x8x16:16,4,1,8:1D/2D"
json parse_baseline(const std::string& text) {
  const auto a = text.find(':');
  const auto b = text.find(':', a == std::string::npos ? a : a + 1);
  if (a == std::string::npos || b == std::string::npos) {
    throw ValidationError("baseline must look like 4x8x16:16,4,1,8:1D/2D");
  }
  json partition = json::array();
  std::stringstream factors(text.substr(a + 1, b - a - 1));
  for (std::string f; std::getline(factors, f, ',');) {
    try {
      partition.push_back(std::stoll(f));
    } catch (const std::exception&) {
      throw ValidationError("baseline factor '" + f + "' is not an integer");
    }
  }
  return {{"shape", SliceShape::parse(text.substr(0, a)).to_string()},
          {"partition", partition},
          {"partitioning", text.substr(b + 1)}};
}

json model_constants_json(const Options& o, const Context& context) {
  const std::string path =
      o.constants_path.empty() ? data_file(context, "model_constants.json") : o.constants_path;
  json doc = read_json(path, "model constants");
  perf::ModelConstants::parse(doc.dump());  // validate early
  return doc;
}

json build_inputs(const std::string& command, const Options& o, const Context& context) {
  if (command == "classify") return {{"shape", o.shape}};
  if (command == "roofline") return {{"chip", o.chip}, {"oi", o.oi}};
  if (command == "co2e") {
    const auto d = sustain::FourMInputs::load(data_file(context, "sustain_defaults.json"));
    return {{"model_factor", o.model_factor.value_or(d.model_factor)},
            {"machine_ratio", o.machine_ratio.value_or(d.machine_ratio)},
            {"pue_reference", o.pue_ref.value_or(d.pue_reference)},
            {"pue_subject", o.pue_sub.value_or(d.pue_subject)},
            {"ci_reference", o.ci_ref.value_or(d.ci_reference)},
            {"ci_subject", o.ci_sub.value_or(d.ci_subject)}};
  }
  if (command == "goodput") {
    json in = {{"mode", o.mode}, {"trials", o.trials}, {"seed", o.seed}, {"hosts", o.hosts}};
    if (o.sweep) {
      in["sweep"] = true;
      in["slices"] = o.slices;
      in["availabilities"] = o.availabilities;
    } else {
      if (o.slice == 0) throw ValidationError("goodput needs --slice (or --sweep)");
      in["slice"] = o.slice;
      in["availability"] = o.availability;
    }
    return in;
  }
  if (command == "collective") {
    json in = {{"op", o.op},
               {"shape", o.shape},
               {"bytes", o.bytes},
               {"link_bandwidth", o.link_gbps * 1e9},
               {"twist", o.twist}};
    if (o.wraparound == "on") in["wraparound"] = true;
    else if (o.wraparound == "off") in["wraparound"] = false;
    else if (o.wraparound != "auto") throw ValidationError("--wraparound must be on, off or auto");
    return in;
  }
  if (command == "plan") {
    json in = {{"blocks", o.blocks}, {"twist", o.twist}};
    if (!o.shape.empty()) in["shape"] = o.shape;
    if (!o.healthy.empty()) in["healthy"] = o.healthy;
    if (o.full) in["full"] = true;
    return in;
  }
  if (command == "search") {
    json in = {{"chips", o.chips},
               {"chip", o.chip},
               {"top", o.top},
               {"workload", read_json(o.workload_path, "workload")},
               {"model_constants", model_constants_json(o, context)}};
    if (!o.baselines.empty()) {
      json list = json::array();
      for (const auto& b : o.baselines) list.push_back(parse_baseline(b));
      in["baselines"] = list;
    }
    return in;
  }
  if (command == "embed") {
    json config = read_json(o.config_path, "embedding config");
    if (!config.is_object()) throw ValidationError("embedding config must be a JSON object");
    json in = {{"chip", config.value("chip", o.chip)},
               {"shape", config.value("shape", std::string())},
               {"twist", config.value("twist", std::string("none"))},
               {"placement", config.value("placement", std::string("accelerator_hbm"))},
               {"sharding", config.value("sharding", json("row"))},
               {"model_constants", model_constants_json(o, context)}};
    if (config.contains("workload")) {
      in["workload"] = config.at("workload");
    } else if (config.contains("workload_file")) {
      fs::path p = config.at("workload_file").get<std::string>();
      if (p.is_relative()) p = fs::path(o.config_path).parent_path() / p;
      in["workload"] = read_json(p.string(), "workload");
    } else {
      throw ValidationError("embedding config needs 'workload' or 'workload_file'");
    }
    if (config.contains("host_dram_bw")) in["host_dram_bw"] = config.at("host_dram_bw");
    if (config.contains("chips_per_host")) in["chips_per_host"] = config.at("chips_per_host");
    if (!o.shape.empty()) in["shape"] = o.shape;
    if (!o.placement.empty()) in["placement"] = o.placement;
    if (o.twist != "none") in["twist"] = o.twist;
    if (in["shape"].get<std::string>().empty()) throw ValidationError("embedding config needs 'shape'");
    return in;
  }
  throw ValidationError("unknown command '" + command + "'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Torus slice planning, goodput, collective and performance models", "torusforge"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", tool_version());
  app.add_option("--out", o.out_path, "Write the report to a file instead of stdout");
  app.add_flag("--csv", o.csv, "Emit tabular outputs (goodput --sweep, search) as CSV");
  app.add_option("--threads", o.threads, "Worker threads, 0 = all cores (results do not depend on it)");
  app.add_option("--catalog", o.catalog, "Chip catalog (default: $TORUSFORGE_CATALOG or data/chips.json)");
  app.add_option("--data-dir", o.data_dir, "Directory with default constants files");

  auto* plan = app.add_subcommand("plan", "Cabling plan and optional slice allocation");
  plan->add_option("--blocks", o.blocks, "Blocks in the machine (1-64)");
  plan->add_option("--shape", o.shape, "Slice shape, e.g. 4x4x8");
  plan->add_option("--twist", o.twist, "none or standard");
  plan->add_option("--healthy", o.healthy, "Healthy block ids (default: all)")->delimiter(',');
  plan->add_flag("--full", o.full, "Include the OCS cross-connect settings");

  auto* good = app.add_subcommand("goodput", "Monte-Carlo goodput under host failures");
  good->add_option("--slice", o.slice, "Slice size in chips");
  good->add_option("--availability", o.availability, "Per-host availability");
  good->add_option("--mode", o.mode, "ocs, static or both");
  good->add_option("--trials", o.trials, "Monte-Carlo trials");
  good->add_option("--seed", o.seed, "Random seed");
  good->add_option("--hosts", o.hosts, "Hosts in the machine");
  good->add_flag("--sweep", o.sweep, "Evaluate the slice x availability grid");
  good->add_option("--slices", o.slices, "Sweep slice sizes")->delimiter(',');
  good->add_option("--availabilities", o.availabilities, "Sweep availabilities")->delimiter(',');

  auto* coll = app.add_subcommand("collective", "Collective time estimates");
  coll->add_option("--op", o.op, "allreduce, alltoall or twist-gain");
  coll->add_option("--shape", o.shape, "Slice shape")->required();
  coll->add_option("--bytes", o.bytes, "Payload (per pair for alltoall)");
  coll->add_option("--link-gbps", o.link_gbps, "Link bandwidth in GB/s per direction");
  coll->add_option("--twist", o.twist, "none, standard or skews like x->z:4");
  coll->add_option("--wraparound", o.wraparound, "on, off or auto (allreduce)");

  auto* search = app.add_subcommand("search", "Rank slice shapes and parallelism partitions");
  search->add_option("--chips", o.chips, "Chip count")->required();
  search->add_option("--workload", o.workload_path, "Workload JSON")->required();
  search->add_option("--chip", o.chip, "Catalog chip");
  search->add_option("--constants", o.constants_path, "Model constants JSON");
  search->add_option("--top", o.top, "Rows in the ranking");
  search->add_option("--baseline", o.baselines, "Extra config to score, e.g. 4x8x16:16,4,1,8:1D/2D");

  auto* embed = app.add_subcommand("embed", "Embedding training step time");
  embed->add_option("--config", o.config_path, "Embedding config JSON")->required();
  embed->add_option("--shape", o.shape, "Override the slice shape");
  embed->add_option("--twist", o.twist, "Override the twist");
  embed->add_option("--placement", o.placement, "accelerator_hbm or host_cpu");
  embed->add_option("--constants", o.constants_path, "Model constants JSON");

  auto* roof = app.add_subcommand("roofline", "Attainable FLOP/s at an operational intensity");
  roof->add_option("--chip", o.chip, "Catalog chip")->required();
  roof->add_option("--oi", o.oi, "Operational intensity, FLOP/byte")->required();

  auto* co2e = app.add_subcommand("co2e", "Operational energy and CO2e ratios");
  co2e->add_option("--model-factor", o.model_factor, "Model factor");
  co2e->add_option("--machine-ratio", o.machine_ratio, "Machine perf/W ratio");
  co2e->add_option("--pue-ref", o.pue_ref, "Reference PUE");
  co2e->add_option("--pue-sub", o.pue_sub, "Subject PUE");
  co2e->add_option("--ci-ref", o.ci_ref, "Reference kgCO2e/kWh");
  co2e->add_option("--ci-sub", o.ci_sub, "Subject kgCO2e/kWh");

  auto* classify = app.add_subcommand("classify", "Classify a slice shape");
  classify->add_option("--shape", o.shape, "Slice shape")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForVersion&) {
    out << tool_version() << '\n';
    return kExitOk;
  } catch (const CLI::Success&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    Context context = Context::from_environment();
    if (!o.data_dir.empty()) {
      context.data_dir = o.data_dir;
      if (std::getenv("TORUSFORGE_CATALOG") == nullptr) {
        context.catalog_path = (fs::path(o.data_dir) / "chips.json").string();
      }
    }
    if (!o.catalog.empty()) context.catalog_path = o.catalog;
    context.threads = o.threads;

    const json inputs = build_inputs(command, o, context);
    const json outputs = execute(command, inputs, context);

    std::string text;
    if (o.csv) {
      if (command == "goodput" && outputs.contains("rows")) {
        text = goodput_csv(outputs);
      } else if (command == "search") {
        text = search_csv(outputs);
      } else {
        throw ValidationError("--csv applies to goodput --sweep and search only");
      }
    } else {
      text = make_report(command, inputs, outputs).dump(2) + "\n";
    }
    if (o.out_path.empty()) {
      out << text;
    } else {
      std::ofstream file(o.out_path);
      if (!file) throw ValidationError("cannot write '" + o.out_path + "'");
      file << text;
    }
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const scheduler::AllocationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace torusforge::cli
