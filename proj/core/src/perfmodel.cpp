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

#include "torusforge/perfmodel.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "torusforge/error.hpp"
#include "torusforge/parallel.hpp"
#include "torusforge/topology.hpp"

namespace torusforge::perf {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path, std::string_view what) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + std::string(what) + " '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json parse_json(const std::string& text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

double number_field(const json& j, const char* key, double fallback, bool required,
                    std::vector<std::string>& problems) {
  if (!j.contains(key)) {
    if (required) problems.push_back(std::string(key) + ": missing");
    return fallback;
  }
  if (!j.at(key).is_number()) {
    problems.push_back(std::string(key) + ": must be a number");
    return fallback;
  }
  return j.at(key).get<double>();
}

void raise_if(const std::vector<std::string>& problems, std::string_view what) {
  if (problems.empty()) return;
  std::string message = std::string(what) + " schema violation:";
  for (const auto& p : problems) message += "\n  " + p;
  throw ValidationError(message);
}

}  // namespace

ModelConstants ModelConstants::parse(const std::string& json_text) {
  const json doc = parse_json(json_text, "model constants");
  std::vector<std::string> problems;
  ModelConstants c;
  const json& dense = doc.contains("dense") ? doc.at("dense") : json::object();
  const json& sparse = doc.contains("embedding") ? doc.at("embedding") : json::object();
  c.efficiency = number_field(dense, "efficiency", c.efficiency, true, problems);
  c.microbatch_factor = number_field(dense, "microbatch_factor", c.microbatch_factor, true, problems);
  if (dense.contains("model_parallel_volume")) {
    const json& mp = dense.at("model_parallel_volume");
    c.mp_volume_2d2d = number_field(mp, "2D/2D", c.mp_volume_2d2d, true, problems);
    c.mp_volume_1d2d = number_field(mp, "1D/2D", c.mp_volume_1d2d, true, problems);
    c.mp_volume_1d1d = number_field(mp, "1D/1D", c.mp_volume_1d1d, true, problems);
  } else {
    problems.push_back("dense.model_parallel_volume: missing");
  }
  c.sparse_overhead_base =
      number_field(sparse, "overhead_base_s", c.sparse_overhead_base, true, problems);
  c.sparse_overhead_per_feature =
      number_field(sparse, "overhead_per_feature_s", c.sparse_overhead_per_feature, true, problems);
  c.host_dram_bw = number_field(sparse, "host_dram_bw", c.host_dram_bw, true, problems);
  c.host_network_penalty =
      number_field(sparse, "host_network_penalty", c.host_network_penalty, true, problems);
  if (!(c.efficiency > 0.0 && c.efficiency <= 1.0)) problems.push_back("efficiency: must be in (0, 1]");
  if (!(c.microbatch_factor >= 1.0)) problems.push_back("microbatch_factor: must be >= 1");
  if (c.sparse_overhead_base < 0.0 || c.sparse_overhead_per_feature < 0.0) {
    problems.push_back("overheads: must be non-negative");
  }
  if (!(c.host_dram_bw > 0.0)) problems.push_back("host_dram_bw: must be positive");
  raise_if(problems, "model constants");
  return c;
}

ModelConstants ModelConstants::load(const std::string& path) {
  return parse(read_file(path, "model constants"));
}

double roofline(const ChipSpec& chip, double oi) {
  if (!(oi >= 0.0)) throw ValidationError("operational intensity must be non-negative");
  if (!chip.hbm_bw) throw ValidationError("chip " + chip.name + " has no attached HBM");
  return std::min(chip.peak_flops, oi * *chip.hbm_bw);
}

double ridge_point(const ChipSpec& chip) {
  if (!chip.hbm_bw) throw ValidationError("chip " + chip.name + " has no attached HBM");
  return chip.peak_flops / *chip.hbm_bw;
}

BisectionBandwidth bisection_bw(const SliceShape& shape, const TwistSpec& twist,
                                const ChipSpec& chip) {
  BisectionBandwidth b;
  b.links = axis_cut_bisection(shape, twist);
  b.per_direction = static_cast<double>(b.links) * chip.ici_bw;
  b.bidirectional = 2.0 * b.per_direction;
  return b;
}

std::string_view to_string(Partitioning p) {
  switch (p) {
    case Partitioning::p1D_1D:
      return "1D/1D";
    case Partitioning::p1D_2D:
      return "1D/2D";
    case Partitioning::p2D_2D:
      return "2D/2D";
  }
  return "?";
}

Partitioning parse_partitioning(std::string_view text) {
  if (text == "1D/1D") return Partitioning::p1D_1D;
  if (text == "1D/2D") return Partitioning::p1D_2D;
  if (text == "2D/2D") return Partitioning::p2D_2D;
  throw ValidationError("partitioning must be 1D/1D, 1D/2D or 2D/2D");
}

std::string_view to_string(Factor f) {
  static constexpr std::string_view kNames[] = {"pipeline", "data", "model1", "model2"};
  return kNames[static_cast<int>(f)];
}

std::int64_t ParallelismSpec::operator[](Factor f) const {
  switch (f) {
    case Factor::pipeline:
      return pipeline;
    case Factor::data:
      return data;
    case Factor::model1:
      return model1;
    case Factor::model2:
      return model2;
  }
  return 1;
}

std::string ParallelismSpec::to_string() const {
  std::ostringstream out;
  out << '[' << pipeline << ", " << data << ", " << model1 << ", " << model2 << "] "
      << perf::to_string(partitioning);
  return out.str();
}

MappingPlan map_parallelism(const SliceShape& shape, const ParallelismSpec& spec) {
  if (!shape.positive()) throw ValidationError("shape dimensions must be positive");
  for (int f = 0; f < kFactors; ++f) {
    if (spec[static_cast<Factor>(f)] < 1) throw ValidationError("parallelism factors must be >= 1");
  }
  if (spec.product() != shape.chips()) {
    throw ValidationError("partition " + spec.to_string() + " covers " +
                          std::to_string(spec.product()) + " chips but shape " +
                          shape.to_string() + " has " + std::to_string(shape.chips()));
  }

  MappingPlan plan;
  plan.shape = shape;
  plan.spec = spec;
  std::array<std::int64_t, kDims> remaining{shape.x, shape.y, shape.z};

  auto take = [&](std::vector<AxisSegment>& out, int axis, std::int64_t extent) {
    const bool full = remaining[axis] == shape[axis] && extent == shape[axis];
    out.push_back({axis, static_cast<int>(extent), full});
    remaining[axis] /= extent;
  };

  for (int f = 0; f < kFactors; ++f) {
    const std::int64_t factor = spec[static_cast<Factor>(f)];
    auto& out = plan.segments[f];
    if (factor == 1) continue;

    std::vector<int> open;
    for (int a = 0; a < kDims; ++a) {
      if (remaining[a] > 1) open.push_back(a);
    }
    bool done = false;
    // One axis of exactly this size.
    for (int a : open) {
      if (remaining[a] == factor) {
        take(out, a, factor);
        done = true;
        break;
      }
    }
    // A run of consecutive remaining axes.
    for (std::size_t i = 0; !done && i < open.size(); ++i) {
      std::int64_t product = remaining[open[i]];
      for (std::size_t j = i + 1; j < open.size() && product < factor; ++j) {
        product *= remaining[open[j]];
        if (product == factor) {
          for (std::size_t k = i; k <= j; ++k) take(out, open[k], remaining[open[k]]);
          done = true;
          break;
        }
      }
    }
    // An exact sub-factor of one axis.
    for (int a : open) {
      if (done) break;
      if (remaining[a] % factor == 0) {
        take(out, a, factor);
        done = true;
      }
    }
    // Whole axes finished by a sub-factor of the next remaining axis.
    for (std::size_t i = 0; !done && i < open.size(); ++i) {
      std::int64_t product = 1;
      for (std::size_t j = i; j + 1 < open.size(); ++j) {
        product *= remaining[open[j]];
        if (factor % product != 0) break;
        const std::int64_t rest = factor / product;
        if (rest > 1 && remaining[open[j + 1]] % rest == 0) {
          for (std::size_t k = i; k <= j; ++k) take(out, open[k], remaining[open[k]]);
          take(out, open[j + 1], rest);
          done = true;
          break;
        }
      }
    }
    if (!done) {
      throw ValidationError("cannot map " + std::string(to_string(static_cast<Factor>(f))) +
                            "=" + std::to_string(factor) + " of " + spec.to_string() +
                            " onto " + shape.to_string());
    }
  }
  return plan;
}

double group_allreduce_time(const std::vector<AxisSegment>& segments, double bytes,
                            double link_bw) {
  std::int64_t group = 1;
  int rings = 0;
  for (const auto& s : segments) {
    if (s.extent <= 1) continue;
    group *= s.extent;
    rings += s.full_axis ? 2 : 1;
  }
  if (group == 1) return 0.0;
  const double moved = 2.0 * bytes * static_cast<double>(group - 1) / static_cast<double>(group);
  return moved / (rings * link_bw);
}

std::int64_t EmbeddingWorkload::feature_count() const {
  std::int64_t n = 0;
  for (const auto& t : tables) n += t.features;
  return n;
}

void EmbeddingWorkload::validate() const {
  std::vector<std::string> problems;
  if (global_batch <= 0) problems.push_back("global_batch: must be positive");
  if (!(dedup >= 1.0)) problems.push_back("dedup: must be >= 1");
  if (dense_flops_per_sample < 0.0) problems.push_back("dense_flops_per_sample: must be >= 0");
  if (dense_param_bytes < 0.0) problems.push_back("dense_param_bytes: must be >= 0");
  if (activation_bytes_per_sample < 0.0) {
    problems.push_back("activation_bytes_per_sample: must be >= 0");
  }
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const auto& t = tables[i];
    const std::string at = "tables[" + std::to_string(i) + "].";
    if (t.vocab_size <= 0) problems.push_back(at + "vocab_size: must be positive");
    if (t.width <= 0) problems.push_back(at + "width: must be positive");
    if (!(t.valency >= 0.0)) problems.push_back(at + "valency: must be >= 0");
    if (t.features < 1) problems.push_back(at + "features: must be >= 1");
  }
  raise_if(problems, "workload");
}

EmbeddingWorkload EmbeddingWorkload::parse(const std::string& json_text) {
  const json doc = parse_json(json_text, "workload");
  std::vector<std::string> problems;
  EmbeddingWorkload w;
  try {
    w.global_batch = static_cast<std::int64_t>(number_field(doc, "global_batch", 0, true, problems));
    w.dedup = number_field(doc, "dedup", 1.0, false, problems);
    w.dense_flops_per_sample = number_field(doc, "dense_flops_per_sample", 0.0, false, problems);
    w.dense_param_bytes = number_field(doc, "dense_param_bytes", 0.0, false, problems);
    w.activation_bytes_per_sample =
        number_field(doc, "activation_bytes_per_sample", 0.0, false, problems);
    if (doc.contains("tables")) {
      for (const auto& t : doc.at("tables")) {
        EmbeddingTable table;
        table.vocab_size = t.at("vocab_size").get<std::int64_t>();
        table.width = t.at("width").get<std::int64_t>();
        table.valency = t.value("valency", 1.0);
        table.features = t.value("features", 1);
        // "count" repeats an identical table definition.
        const int count = t.value("count", 1);
        for (int i = 0; i < count; ++i) w.tables.push_back(table);
      }
    }
  } catch (const json::exception& e) {
    problems.push_back(std::string("tables: ") + e.what());
  }
  raise_if(problems, "workload");
  w.validate();
  return w;
}

EmbeddingWorkload EmbeddingWorkload::load(const std::string& path) {
  return parse(read_file(path, "workload"));
}

DenseEstimate estimate_dense_throughput(const EmbeddingWorkload& workload,
                                        const MappingPlan& plan, const ChipSpec& chip,
                                        const ModelConstants& constants) {
  workload.validate();
  const auto& spec = plan.spec;
  if (spec.product() != plan.shape.chips()) throw ValidationError("mapping plan is inconsistent");
  const double chips = static_cast<double>(plan.shape.chips());
  const double batch = static_cast<double>(workload.global_batch);
  const double bw = chip.ici_bw;
  if (!(bw > 0.0) || !(chip.peak_flops > 0.0)) throw ValidationError("chip bandwidths must be positive");

  DenseEstimate e;
  e.compute = batch * workload.dense_flops_per_sample /
              (chips * chip.peak_flops * constants.efficiency);

  // Each data-parallel replica holds 1 / (pipeline * model) of the weights.
  const double model_shards = static_cast<double>(spec.pipeline * spec.model1 * spec.model2);
  e.data_parallel =
      group_allreduce_time(plan.of(Factor::data), workload.dense_param_bytes / model_shards, bw);

  double multiplier = constants.mp_volume_2d2d;
  if (spec.partitioning == Partitioning::p1D_2D) multiplier = constants.mp_volume_1d2d;
  if (spec.partitioning == Partitioning::p1D_1D) multiplier = constants.mp_volume_1d1d;
  const double exchange = batch * workload.activation_bytes_per_sample /
                          static_cast<double>(spec.data * spec.pipeline);
  e.model_parallel = multiplier * (group_allreduce_time(plan.of(Factor::model1), exchange, bw) +
                                   group_allreduce_time(plan.of(Factor::model2), exchange, bw));

  const double stages = static_cast<double>(spec.pipeline);
  const double microbatches = constants.microbatch_factor * stages;
  e.bubble_fraction = (stages - 1.0) / (microbatches + stages - 1.0);
  const double busy = e.compute + e.data_parallel + e.model_parallel;
  e.step_seconds = busy / (1.0 - e.bubble_fraction);
  e.throughput = e.step_seconds > 0.0 ? batch / e.step_seconds : 0.0;
  return e;
}

std::vector<SliceShape> enumerate_block_shapes(std::int64_t n_chips) {
  if (n_chips < 64 || n_chips % 64 != 0) {
    throw ValidationError("chip count " + std::to_string(n_chips) +
                          " is not a whole number of 4x4x4 blocks");
  }
  std::vector<SliceShape> shapes;
  for (std::int64_t x = 4; x * x * x <= n_chips; x += 4) {
    if (n_chips % x != 0) continue;
    for (std::int64_t y = x; x * y * y <= n_chips; y += 4) {
      if ((n_chips / x) % y != 0) continue;
      const std::int64_t z = n_chips / (x * y);
      if (z >= y && z % 4 == 0) {
        shapes.push_back({static_cast<int>(x), static_cast<int>(y), static_cast<int>(z)});
      }
    }
  }
  return shapes;
}

namespace {

std::vector<std::int64_t> divisors(std::int64_t n) {
  std::vector<std::int64_t> out;
  for (std::int64_t d = 1; d * d <= n; ++d) {
    if (n % d) continue;
    out.push_back(d);
    if (d * d != n) out.push_back(n / d);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<SearchCandidate> search_best_config(std::int64_t n_chips,
                                                const EmbeddingWorkload& workload,
                                                const ChipSpec& chip,
                                                const ModelConstants& constants,
                                                unsigned threads) {
  const auto shapes = enumerate_block_shapes(n_chips);
  workload.validate();

  std::vector<ParallelismSpec> specs;
  for (auto p : divisors(n_chips)) {
    for (auto d : divisors(n_chips / p)) {
      for (auto m1 : divisors(n_chips / (p * d))) {
        const std::int64_t m2 = n_chips / (p * d * m1);
        for (auto part : {Partitioning::p1D_1D, Partitioning::p1D_2D, Partitioning::p2D_2D}) {
          specs.push_back({p, d, m1, m2, part});
        }
      }
    }
  }

  struct Slot {
    bool valid = false;
    SearchCandidate candidate;
  };
  const std::size_t total = shapes.size() * specs.size();
  std::vector<Slot> slots(total);
  constexpr std::size_t kChunk = 256;
  parallel_for_chunks((total + kChunk - 1) / kChunk, threads, [&](std::size_t c) {
    const std::size_t end = std::min(total, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      const SliceShape& shape = shapes[i / specs.size()];
      const ParallelismSpec& spec = specs[i % specs.size()];
      try {
        const MappingPlan plan = map_parallelism(shape, spec);
        slots[i] = {true, {shape, spec, estimate_dense_throughput(workload, plan, chip, constants)}};
      } catch (const ValidationError&) {
        // Not mappable onto this shape.
      }
    }
  });

  std::vector<SearchCandidate> ranked;
  for (auto& s : slots) {
    if (s.valid) ranked.push_back(std::move(s.candidate));
  }
  std::sort(ranked.begin(), ranked.end(), [](const SearchCandidate& a, const SearchCandidate& b) {
    if (a.estimate.throughput != b.estimate.throughput) {
      return a.estimate.throughput > b.estimate.throughput;
    }
    if (a.shape != b.shape) return a.shape < b.shape;
    return a.spec < b.spec;
  });
  return ranked;
}

}  // namespace torusforge::perf
