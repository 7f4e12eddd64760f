// Copyright 2026 The InSPO Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "inspo/error.hpp"
#include "inspo/losses.hpp"
#include "inspo/objective.hpp"
#include "inspo/policy.hpp"
#include "inspo/prefcore.hpp"
#include "inspo/trainer.hpp"

// JSON and CSV encodings of every value the lab reads or writes.
//
// Each top-level document carries "schema_version" and a "type" tag. Tensors
// are row-major nested arrays of doubles. Objects are read strictly: unknown
// keys are rejected, except "notes", which may appear in any object.
namespace inspo::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Strict object reading.

class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) error("expected an object");
  }

  const std::string& path() const { return path_; }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) error("missing field '" + key + "'");
    return j_.at(key);
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  double number(const std::string& key) { return as_number(at(key), child(key)); }
  double number_or(const std::string& key, double fallback) {
    const Json* v = find(key);
    return v ? as_number(*v, child(key)) : fallback;
  }
  std::optional<double> optional_number(const std::string& key) {
    const Json* v = find(key);
    if (!v) return std::nullopt;
    return as_number(*v, child(key));
  }

  std::int64_t integer(const std::string& key) { return as_integer(at(key), child(key)); }
  std::int64_t integer_or(const std::string& key, std::int64_t fallback) {
    const Json* v = find(key);
    return v ? as_integer(*v, child(key)) : fallback;
  }

  std::uint64_t seed(const std::string& key) { return as_seed(at(key), child(key)); }
  std::uint64_t seed_or(const std::string& key, std::uint64_t fallback) {
    const Json* v = find(key);
    return v ? as_seed(*v, child(key)) : fallback;
  }

  std::string string(const std::string& key) { return as_string(at(key), child(key)); }
  std::string string_or(const std::string& key, const std::string& fallback) {
    const Json* v = find(key);
    return v ? as_string(*v, child(key)) : fallback;
  }

  bool boolean_or(const std::string& key, bool fallback) {
    const Json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail_at(child(key), "expected a boolean");
    return v->get<bool>();
  }

  // Rejects any key that was never asked for.
  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (key != "notes" && !seen_.contains(key))
        fail_at(child(key), "unknown field");
  }

  void check_header(const std::string& type) {
    const auto v = integer("schema_version");
    if (v != kSchemaVersion)
      fail_at(child("schema_version"), "unsupported schema version " + std::to_string(v));
    const auto t = string("type");
    if (t != type) fail_at(child("type"), "expected type '" + type + "', found '" + t + "'");
  }

  [[noreturn]] void error(const std::string& message) const { fail_at(path_, message); }

  [[noreturn]] static void fail_at(const std::string& path, const std::string& message) {
    fail(ErrorKind::kParse, (path.empty() ? std::string("<root>") : path) + ": " + message);
  }

  static double as_number(const Json& v, const std::string& path) {
    if (!v.is_number()) fail_at(path, "expected a number");
    return v.get<double>();
  }
  static std::int64_t as_integer(const Json& v, const std::string& path) {
    if (!v.is_number_integer()) fail_at(path, "expected an integer");
    return v.get<std::int64_t>();
  }
  static std::uint64_t as_seed(const Json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    fail_at(path, "expected a non-negative integer seed");
  }
  static std::string as_string(const Json& v, const std::string& path) {
    if (!v.is_string()) fail_at(path, "expected a string");
    return v.get<std::string>();
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline Json header(const std::string& type) {
  return Json{{"schema_version", kSchemaVersion}, {"type", type}};
}

// ---------------------------------------------------------------------------
// Tensors.

inline Json to_json(const Matrix& t) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < t.dim(0); ++i) {
    Json row = Json::array();
    for (double v : t.row(i)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json to_json(const Cube& t) {
  Json out = Json::array();
  for (std::size_t i = 0; i < t.dim(0); ++i) {
    Json mid = Json::array();
    for (std::size_t j = 0; j < t.dim(1); ++j) {
      Json row = Json::array();
      for (double v : t.row(i, j)) row.push_back(v);
      mid.push_back(std::move(row));
    }
    out.push_back(std::move(mid));
  }
  return out;
}

inline std::vector<double> number_row(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) Reader::fail_at(path, "expected a non-empty array of numbers");
  std::vector<double> row;
  row.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    row.push_back(Reader::as_number(j[i], path + "[" + std::to_string(i) + "]"));
  return row;
}

inline Matrix matrix_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) Reader::fail_at(path, "expected a non-empty 2-d array");
  std::vector<double> data;
  std::size_t cols = 0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto row = number_row(j[i], path + "[" + std::to_string(i) + "]");
    if (i == 0) cols = row.size();
    if (row.size() != cols) Reader::fail_at(path, "ragged 2-d array");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix({j.size(), cols}, std::move(data));
}

inline Cube cube_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) Reader::fail_at(path, "expected a non-empty 3-d array");
  std::vector<double> data;
  std::size_t d1 = 0, d2 = 0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto m = matrix_from_json(j[i], path + "[" + std::to_string(i) + "]");
    if (i == 0) {
      d1 = m.dim(0);
      d2 = m.dim(1);
    }
    if (m.dim(0) != d1 || m.dim(1) != d2) Reader::fail_at(path, "ragged 3-d array");
    data.insert(data.end(), m.data().begin(), m.data().end());
  }
  return Cube({j.size(), d1, d2}, std::move(data));
}

// Library validation failures surface as parse errors tagged with the path.
template <typename F>
auto validated(const std::string& path, F&& make) {
  try {
    return make();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kParse) throw;
    Reader::fail_at(path, e.what());
  }
}

// ---------------------------------------------------------------------------
// prefcore values.

inline Json to_json(const Spaces& s) {
  return Json{{"num_contexts", s.num_contexts},
              {"num_responses", s.num_responses},
              {"lengths", s.lengths},
              {"context_dist", s.context_dist}};
}

inline Spaces spaces_from_json(const Json& j, const std::string& path) {
  Reader r(j, path);
  Spaces s;
  s.num_contexts = static_cast<std::size_t>(r.integer("num_contexts"));
  s.num_responses = static_cast<std::size_t>(r.integer("num_responses"));
  if (const Json* l = r.find("lengths")) {
    if (!l->is_array()) Reader::fail_at(r.child("lengths"), "expected an array");
    for (std::size_t i = 0; i < l->size(); ++i)
      s.lengths.push_back(static_cast<int>(
          Reader::as_integer((*l)[i], r.child("lengths") + "[" + std::to_string(i) + "]")));
  } else {
    s.lengths.assign(s.num_responses, 1);
  }
  if (const Json* d = r.find("context_dist")) {
    s.context_dist = number_row(*d, r.child("context_dist"));
  } else {
    s.context_dist.assign(s.num_contexts, 1.0 / static_cast<double>(s.num_contexts));
  }
  r.finish();
  validated(path, [&] {
    s.validate();
    return 0;
  });
  return s;
}

// Standalone spaces file: the same fields under a versioned header.
inline Json spaces_document(const Spaces& s) {
  Json j = header("spaces");
  const Json fields = to_json(s);
  for (auto& [key, value] : fields.items()) j[key] = value;
  return j;
}

inline Spaces spaces_document_from_json(const Json& j, const std::string& path = "") {
  Reader r(j, path);
  r.check_header("spaces");
  Json fields = j;
  fields.erase("schema_version");
  fields.erase("type");
  return spaces_from_json(fields, path);
}

inline Json to_json(const PreferenceModel& p) {
  Json j = header("preference_model");
  j["probs"] = to_json(p.probs());
  return j;
}

inline PreferenceModel preference_model_from_json(const Json& j, const std::string& path = "") {
  Reader r(j, path);
  r.check_header("preference_model");
  auto probs = cube_from_json(r.at("probs"), r.child("probs"));
  r.finish();
  return validated(r.child("probs"), [&] { return PreferenceModel(std::move(probs)); });
}

inline Json to_json(const ContextPolicy& p) {
  Json j = header("context_policy");
  j["probs"] = to_json(p.probs());
  return j;
}

inline ContextPolicy context_policy_from_json(const Json& j, const std::string& path = "") {
  Reader r(j, path);
  r.check_header("context_policy");
  auto probs = matrix_from_json(r.at("probs"), r.child("probs"));
  r.finish();
  return validated(r.child("probs"), [&] { return ContextPolicy(std::move(probs)); });
}

inline Json to_json(const CrossPolicy& p) {
  Json j = header("cross_policy");
  j["probs"] = to_json(p.probs());
  return j;
}

inline CrossPolicy cross_policy_from_json(const Json& j, const std::string& path = "") {
  Reader r(j, path);
  r.check_header("cross_policy");
  auto probs = cube_from_json(r.at("probs"), r.child("probs"));
  r.finish();
  return validated(r.child("probs"), [&] { return CrossPolicy(std::move(probs)); });
}

// Pairs are [x, y_w, y_l] triples.
inline Json to_json(const PreferenceDataset& d) {
  Json j = header("preference_dataset");
  j["seed"] = d.seed;
  Json pairs = Json::array();
  for (const auto& p : d.pairs) pairs.push_back(Json::array({p.x, p.y_w, p.y_l}));
  j["pairs"] = std::move(pairs);
  return j;
}

inline PreferenceDataset dataset_from_json(const Json& j, const std::string& path = "") {
  Reader r(j, path);
  r.check_header("preference_dataset");
  PreferenceDataset d;
  d.seed = r.seed("seed");
  const Json& pairs = r.at("pairs");
  if (!pairs.is_array()) Reader::fail_at(r.child("pairs"), "expected an array");
  d.pairs.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::string p = r.child("pairs") + "[" + std::to_string(i) + "]";
    const Json& t = pairs[i];
    if (!t.is_array() || t.size() != 3) Reader::fail_at(p, "expected [x, y_w, y_l]");
    PreferencePair pair;
    pair.x = static_cast<std::size_t>(Reader::as_seed(t[0], p));
    pair.y_w = static_cast<std::size_t>(Reader::as_seed(t[1], p));
    pair.y_l = static_cast<std::size_t>(Reader::as_seed(t[2], p));
    if (pair.y_w == pair.y_l) Reader::fail_at(p, "winner and loser coincide");
    d.pairs.push_back(pair);
  }
  r.finish();
  return d;
}

// ---------------------------------------------------------------------------
// objective values.

inline Json to_json(const PsiSpec& psi) {
  Json j{{"kind", psi.name()}};
  if (psi.kind == PsiSpec::Kind::kAffine) {
    j["slope"] = psi.slope;
    j["intercept"] = psi.intercept;
  }
  if (psi.kind == PsiSpec::Kind::kClippedLogOdds) j["epsilon"] = psi.epsilon;
  return j;
}

inline PsiSpec psi_from_json(const Json& j, const std::string& path) {
  Reader r(j, path);
  const auto kind = r.string("kind");
  PsiSpec psi;
  if (kind == "identity") {
    psi = PsiSpec::identity();
  } else if (kind == "log-odds") {
    psi = PsiSpec::log_odds();
  } else if (kind == "affine") {
    const double a = r.number("slope"), b = r.number_or("intercept", 0.0);
    psi = validated(path, [&] { return PsiSpec::affine(a, b); });
  } else if (kind == "clipped-log-odds") {
    const double eps = r.number_or("epsilon", 1e-6);
    psi = validated(path, [&] { return PsiSpec::clipped_log_odds(eps); });
  } else {
    Reader::fail_at(r.child("kind"), "unknown psi kind '" + kind + "'");
  }
  r.finish();
  return psi;
}

inline Json to_json(const RewardTensor& t) {
  Json j = header("reward_tensor");
  j["r"] = to_json(t.r);
  return j;
}

inline RewardTensor reward_from_json(const Json& j, const std::string& path = "") {
  Reader r(j, path);
  r.check_header("reward_tensor");
  RewardTensor t{cube_from_json(r.at("r"), r.child("r"))};
  r.finish();
  return t;
}

inline Json to_json(const PartitionTable& z) {
  Json j = header("partition_table");
  j["log_z"] = to_json(z.log_z);
  return j;
}

inline PartitionTable partition_from_json(const Json& j, const std::string& path = "") {
  Reader r(j, path);
  r.check_header("partition_table");
  PartitionTable z{matrix_from_json(r.at("log_z"), r.child("log_z"))};
  r.finish();
  return z;
}

// ---------------------------------------------------------------------------
// Policy parameters.

inline Json to_json(const PolicyParams& p) {
  Json j = header("policy_params");
  const std::size_t m = p.num_contexts(), k = p.num_responses();
  j["kind"] = to_string(p.kind());
  j["num_contexts"] = m;
  j["num_responses"] = k;
  const auto theta = p.theta();
  switch (p.kind()) {
    case PolicyKind::kTabularContext:
      j["logits"] = to_json(Matrix({m, k}, {theta.begin(), theta.end()}));
      break;
    case PolicyKind::kTabularCross:
      j["logits"] = to_json(Cube({m, k, k}, {theta.begin(), theta.end()}));
      break;
    case PolicyKind::kSharedLupi:
      j["base"] = to_json(Matrix({m, k}, {theta.begin(), theta.begin() + m * k}));
      j["interaction"] = to_json(Matrix({k, k}, {theta.begin() + m * k, theta.end()}));
      break;
  }
  return j;
}

inline PolicyParams policy_params_from_json(const Json& j, const std::string& path = "") {
  Reader r(j, path);
  r.check_header("policy_params");
  const auto kind = validated(r.child("kind"), [&] { return policy_kind_from_string(r.string("kind")); });
  const auto m = static_cast<std::size_t>(r.integer("num_contexts"));
  const auto k = static_cast<std::size_t>(r.integer("num_responses"));
  std::vector<double> theta;
  auto append = [&](std::span<const double> d) { theta.insert(theta.end(), d.begin(), d.end()); };
  auto expect = [&](bool ok, const std::string& field) {
    if (!ok) Reader::fail_at(r.child(field), "shape does not match num_contexts/num_responses");
  };
  switch (kind) {
    case PolicyKind::kTabularContext: {
      const auto t = matrix_from_json(r.at("logits"), r.child("logits"));
      expect(t.dim(0) == m && t.dim(1) == k, "logits");
      append(t.data());
      break;
    }
    case PolicyKind::kTabularCross: {
      const auto t = cube_from_json(r.at("logits"), r.child("logits"));
      expect(t.dim(0) == m && t.dim(1) == k && t.dim(2) == k, "logits");
      append(t.data());
      break;
    }
    case PolicyKind::kSharedLupi: {
      const auto u = matrix_from_json(r.at("base"), r.child("base"));
      const auto v = matrix_from_json(r.at("interaction"), r.child("interaction"));
      expect(u.dim(0) == m && u.dim(1) == k, "base");
      expect(v.dim(0) == k && v.dim(1) == k, "interaction");
      append(u.data());
      append(v.data());
      break;
    }
  }
  r.finish();
  return validated(path, [&] { return PolicyParams(kind, m, k, std::move(theta)); });
}

// ---------------------------------------------------------------------------
// Loss and training configuration.

inline Json to_json(const LossSpec& s) {
  Json j{{"method", to_string(s.method)}, {"conditioning", to_string(s.conditioning)}};
  if (s.beta) j["beta"] = *s.beta;
  if (s.tau) j["tau"] = *s.tau;
  if (s.alpha) j["alpha"] = *s.alpha;
  if (s.lambda) j["lambda"] = *s.lambda;
  if (s.gamma) j["gamma"] = *s.gamma;
  return j;
}

inline LossSpec loss_spec_from_json(const Json& j, const std::string& path) {
  Reader r(j, path);
  LossSpec s;
  s.method = validated(r.child("method"), [&] { return method_from_string(r.string("method")); });
  s.conditioning = validated(r.child("conditioning"), [&] {
    return conditioning_from_string(r.string_or("conditioning", "none"));
  });
  s.beta = r.optional_number("beta");
  s.tau = r.optional_number("tau");
  s.alpha = r.optional_number("alpha");
  s.lambda = r.optional_number("lambda");
  s.gamma = r.optional_number("gamma");
  r.finish();
  validated(path, [&] {
    s.validate();
    return 0;
  });
  return s;
}

inline Json to_json(const OptimizerSpec& o) {
  Json j{{"type", to_string(o.type)}};
  if (o.type == OptimizerSpec::Type::kSgdMomentum) j["momentum"] = o.momentum;
  if (o.type == OptimizerSpec::Type::kAdam) {
    j["beta1"] = o.beta1;
    j["beta2"] = o.beta2;
    j["epsilon"] = o.epsilon;
  }
  return j;
}

inline OptimizerSpec optimizer_from_json(const Json& j, const std::string& path) {
  Reader r(j, path);
  const auto type = r.string("type");
  OptimizerSpec o;
  if (type == "sgd") {
    o = OptimizerSpec::sgd();
  } else if (type == "sgd-momentum") {
    o = OptimizerSpec::sgd_momentum(r.number_or("momentum", 0.9));
  } else if (type == "adam") {
    o = OptimizerSpec::adam(r.number_or("beta1", 0.9), r.number_or("beta2", 0.999),
                            r.number_or("epsilon", 1e-8));
  } else {
    Reader::fail_at(r.child("type"), "unknown optimizer '" + type + "'");
  }
  r.finish();
  validated(path, [&] {
    o.validate();
    return 0;
  });
  return o;
}

inline Json to_json(const TrainConfig& c) {
  return Json{{"loss", to_json(c.loss)},
              {"policy_kind", to_string(c.policy_kind)},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate},
              {"optimizer", to_json(c.optimizer)},
              {"shuffle_seed", c.shuffle_seed},
              {"reference_init", c.reference_init},
              {"eval_every", c.eval_every}};
}

// Missing fields keep the TrainConfig defaults.
inline TrainConfig train_config_from_json(const Json& j, const std::string& path,
                                          TrainConfig c = {}) {
  Reader r(j, path);
  if (const Json* l = r.find("loss")) c.loss = loss_spec_from_json(*l, r.child("loss"));
  if (r.has("policy_kind"))
    c.policy_kind = validated(r.child("policy_kind"),
                              [&] { return policy_kind_from_string(r.string("policy_kind")); });
  c.epochs = static_cast<int>(r.integer_or("epochs", c.epochs));
  c.batch_size = static_cast<std::size_t>(
      r.integer_or("batch_size", static_cast<std::int64_t>(c.batch_size)));
  c.learning_rate = r.number_or("learning_rate", c.learning_rate);
  if (const Json* o = r.find("optimizer")) c.optimizer = optimizer_from_json(*o, r.child("optimizer"));
  c.shuffle_seed = r.seed_or("shuffle_seed", c.shuffle_seed);
  c.reference_init = r.boolean_or("reference_init", c.reference_init);
  c.eval_every = static_cast<long>(r.integer_or("eval_every", c.eval_every));
  r.finish();
  validated(path, [&] {
    c.validate();
    return 0;
  });
  return c;
}

// ---------------------------------------------------------------------------
// CSV.

// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(ErrorKind::kParse, "not a number: '" + s + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::string curves_csv(const TrainingCurves& c) {
  std::string out = "step,loss,accuracy,margin\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    out += std::to_string(c.step[i]) + "," + format_double(c.loss[i]) + "," +
           format_double(c.accuracy[i]) + "," + format_double(c.margin[i]) + "\n";
  }
  return out;
}

inline TrainingCurves curves_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "step,loss,accuracy,margin")
    fail(ErrorKind::kParse, "curves CSV: missing or wrong header");
  TrainingCurves c;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 4)
      fail(ErrorKind::kParse, "curves CSV line " + std::to_string(lineno) + ": expected 4 columns");
    Metrics m{parse_double(cells[1]), parse_double(cells[2]), parse_double(cells[3])};
    c.push(static_cast<long>(parse_double(cells[0])), m);
  }
  return c;
}

inline Json to_json(const TrainingCurves& c) {
  return Json{{"step", c.step}, {"loss", c.loss}, {"accuracy", c.accuracy}, {"margin", c.margin}};
}

// ---------------------------------------------------------------------------
// Files.

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) fail(ErrorKind::kIo, "failed writing '" + path + "'");
}

// Parse errors report the 1-based line and column of the offending byte.
inline Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorKind::kParse, source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                ": malformed JSON (" + e.what() + ")");
  }
}

inline Json read_json_file(const std::string& path) { return parse_json(read_text_file(path), path); }

inline void write_json_file(const std::string& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace inspo::io
