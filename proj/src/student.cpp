// Copyright 2026 The ConcernKit Authors.
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

#include "concernkit/student.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

#include "concernkit/hash.hpp"
#include "concernkit/persistence.hpp"

namespace concernkit {

WeightingScheme WeightingScheme::parse(std::string_view name) {
  WeightingScheme s;
  if (name == "baseline") return s;
  if (name == "no_clamp") {
    s.kind = WeightingKind::no_clamp;
    return s;
  }
  if (name == "log1p") {
    s.kind = WeightingKind::log1p;
    return s;
  }
  if (name.starts_with("clamp")) {
    s.kind = WeightingKind::clamp;
    std::string_view rest = name.substr(5);
    if (rest.starts_with(":")) rest.remove_prefix(1);
    if (!rest.empty()) {
      double k = 0.0;
      const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), k);
      if (ec != std::errc() || ptr != rest.data() + rest.size() || !(k > 0.0)) {
        throw ValidationError("invalid_scheme", "bad clamp value in '" + std::string(name) + "'");
      }
      s.clamp_max = k;
    }
    return s;
  }
  throw ValidationError("invalid_scheme", "unknown weighting scheme '" + std::string(name) +
                                              "' (expected baseline, clamp[:k], no_clamp, log1p)");
}

std::string WeightingScheme::name() const {
  switch (kind) {
    case WeightingKind::baseline: return "baseline";
    case WeightingKind::no_clamp: return "no_clamp";
    case WeightingKind::log1p: return "log1p";
    case WeightingKind::clamp: {
      char buf[32];
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, clamp_max);
      return "clamp:" + std::string(buf, ptr);
    }
  }
  return "baseline";
}

ClassWeight class_weight(std::size_t positives, std::size_t negatives, const WeightingScheme& scheme) {
  ClassWeight cw;
  cw.positives = positives;
  cw.negatives = negatives;
  if (positives == 0 || negatives == 0) {
    cw.degenerate = true;
    return cw;
  }
  cw.raw = static_cast<double>(negatives) / static_cast<double>(positives);
  switch (scheme.kind) {
    case WeightingKind::baseline: cw.weight = 1.0; break;
    case WeightingKind::clamp: cw.weight = std::min(cw.raw, scheme.clamp_max); break;
    case WeightingKind::no_clamp: cw.weight = cw.raw; break;
    case WeightingKind::log1p: cw.weight = std::log1p(cw.raw); break;
  }
  return cw;
}

std::vector<ClassWeight> class_weights(std::span<const LabelVector> y, std::size_t num_labels,
                                       const WeightingScheme& scheme) {
  std::vector<std::size_t> pos(num_labels, 0);
  for (const auto& row : y) {
    if (row.size() != num_labels) throw ValidationError("length_mismatch", "label row has the wrong width");
    for (std::size_t c = 0; c < num_labels; ++c) pos[c] += row[c];
  }
  std::vector<ClassWeight> out;
  for (std::size_t c = 0; c < num_labels; ++c) out.push_back(class_weight(pos[c], y.size() - pos[c], scheme));
  return out;
}

double sigmoid(double z) noexcept {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

double softplus(double z) noexcept { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// -[w y log s(z) + (1 - y) log(1 - s(z))]
double sample_loss(double z, bool y, double w) noexcept { return y ? w * softplus(-z) : softplus(z); }

// d loss / dz
double sample_dlogit(double z, bool y, double w) noexcept {
  const double s = sigmoid(z);
  return y ? w * (s - 1.0) : s;
}

}  // namespace

void LinearModel::logits(const SparseVector& x, double* out) const {
  for (std::size_t c = 0; c < labels; ++c) out[c] = b[c];
  for (std::size_t k = 0; k < x.nnz(); ++k) {
    const double v = x.value[k];
    const double* row = w.data() + std::size_t{x.index[k]} * labels;
    for (std::size_t c = 0; c < labels; ++c) out[c] += v * row[c];
  }
}

LossGradient weighted_bce(const LinearModel& m, std::span<const SparseVector> x, std::span<const LabelVector> y,
                          std::span<const double> pos_weight, double l2) {
  if (x.size() != y.size()) throw ValidationError("length_mismatch", "features and labels differ in length");
  if (pos_weight.size() != m.labels) throw ValidationError("length_mismatch", "one weight per label is required");
  LossGradient g;
  g.grad_w.assign(m.w.size(), 0.0);
  g.grad_b.assign(m.labels, 0.0);
  std::vector<double> z(m.labels);
  for (std::size_t i = 0; i < x.size(); ++i) {
    m.logits(x[i], z.data());
    for (std::size_t c = 0; c < m.labels; ++c) {
      g.loss += sample_loss(z[c], y[i][c], pos_weight[c]);
      const double d = sample_dlogit(z[c], y[i][c], pos_weight[c]);
      g.grad_b[c] += d;
      for (std::size_t k = 0; k < x[i].nnz(); ++k) g.grad_w[std::size_t{x[i].index[k]} * m.labels + c] += d * x[i].value[k];
    }
  }
  for (std::size_t j = 0; j < m.w.size(); ++j) {
    g.loss += l2 * m.w[j] * m.w[j];
    g.grad_w[j] += 2.0 * l2 * m.w[j];
  }
  return g;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("invalid_config", "learning_rate must be positive");
  }
  if (epochs < 1) throw ValidationError("invalid_config", "epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("invalid_config", "batch_size must be >= 1");
  if (l2 < 0.0 || 2.0 * learning_rate * l2 >= 1.0) {
    throw ValidationError("invalid_config", "l2 must satisfy 0 <= 2 * learning_rate * l2 < 1");
  }
}

TrainResult train_linear(std::span<const SparseVector> x, std::span<const LabelVector> y, std::uint32_t dims,
                         std::size_t num_labels, const TrainConfig& config) {
  config.validate();
  if (x.size() != y.size()) throw ValidationError("length_mismatch", "features and labels differ in length");
  if (x.empty()) throw ValidationError("empty_training_set", "no training examples");
  for (const auto& row : x) {
    if (!row.index.empty() && row.index.back() >= dims) {
      throw ValidationError("invalid_features", "feature index out of range");
    }
  }

  TrainResult r;
  r.weights = class_weights(y, num_labels, config.scheme);
  std::vector<double> pw;
  for (const auto& cw : r.weights) pw.push_back(cw.weight);

  // W = scale * V: the L2 shrink of every step is folded into `scale`, so an
  // update only touches the rows of the batch's active features.
  LinearModel& m = r.model;
  m = LinearModel(dims, num_labels);
  double scale = 1.0;
  const double lr = config.learning_rate;
  const double shrink = 1.0 - 2.0 * lr * config.l2;

  const std::size_t n = x.size();
  const std::size_t L = num_labels;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);
  std::vector<double> z(L), dz(config.batch_size * L), db(L);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      std::fill(db.begin(), db.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        for (std::size_t c = 0; c < L; ++c) z[c] = 0.0;
        for (std::size_t j = 0; j < x[i].nnz(); ++j) {
          const double v = x[i].value[j];
          const double* row = m.w.data() + std::size_t{x[i].index[j]} * L;
          for (std::size_t c = 0; c < L; ++c) z[c] += v * row[c];
        }
        double* d = dz.data() + (k - start) * L;
        for (std::size_t c = 0; c < L; ++c) {
          const double logit = scale * z[c] + m.b[c];
          epoch_loss += sample_loss(logit, y[i][c], pw[c]);
          d[c] = sample_dlogit(logit, y[i][c], pw[c]);
          db[c] += d[c];
        }
      }
      scale *= shrink;
      const double step = lr / scale;
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        const double* d = dz.data() + (k - start) * L;
        for (std::size_t j = 0; j < x[i].nnz(); ++j) {
          const double v = step * x[i].value[j];
          double* row = m.w.data() + std::size_t{x[i].index[j]} * L;
          for (std::size_t c = 0; c < L; ++c) row[c] -= v * d[c];
        }
      }
      for (std::size_t c = 0; c < L; ++c) m.b[c] -= lr * db[c];
      if (scale < 1e-6) {
        for (double& v : m.w) v *= scale;
        scale = 1.0;
      }
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw TrainingDivergedError("loss became non-finite in epoch " + std::to_string(epoch + 1) +
                                  "; lower the learning rate or use a milder weighting scheme");
    }
    r.epoch_loss.push_back(epoch_loss);
  }
  for (double& v : m.w) v *= scale;
  for (std::size_t c = 0; c < L; ++c) {
    if (!std::isfinite(m.b[c])) {
      throw TrainingDivergedError("bias of label " + std::to_string(c) + " is non-finite");
    }
  }
  for (std::size_t j = 0; j < m.w.size(); ++j) {
    if (!std::isfinite(m.w[j])) {
      throw TrainingDivergedError("weight of feature " + std::to_string(j / L) + ", label " + std::to_string(j % L) +
                                  " is non-finite");
    }
  }
  return r;
}

std::string_view to_string(StudentTask t) noexcept { return t == StudentTask::relevance ? "relevance" : "multilabel"; }

std::vector<double> StudentModel::scores(const SparseVector& x) const {
  std::vector<double> z(linear.labels);
  linear.logits(x, z.data());
  for (double& v : z) v = sigmoid(v);
  return z;
}

std::vector<double> StudentModel::scores(std::string_view text) const { return scores(featurizer.transform(text)); }

LabelVector StudentModel::predict(const SparseVector& x) const {
  const auto s = scores(x);
  LabelVector v(s.size());
  for (std::size_t c = 0; c < s.size(); ++c) v.set(c, s[c] >= thresholds[c]);
  return v;
}

LabelVector StudentModel::predict(std::string_view text) const { return predict(featurizer.transform(text)); }

void StudentModel::check_taxonomy(const Taxonomy& t) const {
  if (task != StudentTask::multilabel) return;
  if (t.version() != taxonomy_version || t.ids() != label_ids) {
    throw VersionMismatchError("model was trained on taxonomy '" + taxonomy_version + "' but '" + t.version() +
                               "' is loaded");
  }
}

StudentModel fit_student(StudentTask task, const std::vector<std::string>& label_ids, std::string taxonomy_version,
                         std::span<const std::string> texts, std::span<const LabelVector> labels,
                         const FeaturizerConfig& fcfg, const TrainConfig& tcfg, TrainResult* train) {
  if (texts.size() != labels.size()) throw ValidationError("length_mismatch", "texts and labels differ in length");
  StudentModel m;
  m.task = task;
  m.taxonomy_version = std::move(taxonomy_version);
  m.label_ids = label_ids;
  m.featurizer = Featurizer(fcfg);
  m.featurizer.fit(texts);
  const auto x = m.featurizer.transform_all(texts);
  TrainResult r = train_linear(x, labels, fcfg.hash_dims, label_ids.size(), tcfg);
  m.linear = r.model;
  m.thresholds.assign(label_ids.size(), 0.5);

  nlohmann::json degenerate = nlohmann::json::array();
  for (std::size_t c = 0; c < label_ids.size(); ++c) {
    if (r.weights[c].degenerate) degenerate.push_back(label_ids[c]);
  }
  m.meta = {{"scheme", tcfg.scheme.name()},  {"seed", tcfg.seed},
            {"epochs", tcfg.epochs},         {"learning_rate", tcfg.learning_rate},
            {"batch_size", tcfg.batch_size}, {"l2", tcfg.l2},
            {"train_size", texts.size()},    {"degenerate_labels", degenerate}};
  if (train) *train = std::move(r);
  return m;
}

ThresholdSelection select_thresholds(StudentModel& m, std::span<const std::string> texts,
                                     std::span<const LabelVector> labels) {
  if (texts.size() != labels.size()) throw ValidationError("length_mismatch", "texts and labels differ in length");
  const auto x = m.featurizer.transform_all(texts);
  std::vector<std::vector<double>> sc(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sc[i] = m.scores(x[i]);
  auto sel = best_f1_thresholds(sc, {labels.begin(), labels.end()}, /*include_half=*/true);
  m.thresholds = sel.thresholds;
  // a probability of exactly 0 or 1 would leave the open interval
  for (double& t : m.thresholds) t = std::clamp(t, std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0));
  nlohmann::json defaulted = nlohmann::json::array();
  for (std::size_t c = 0; c < m.label_ids.size(); ++c) {
    if (sel.defaulted[c]) defaulted.push_back(m.label_ids[c]);
  }
  m.meta["calibration_size"] = texts.size();
  m.meta["thresholds_defaulted"] = defaulted;
  return sel;
}

StudentTrainOutput train_student(StudentTask task, const std::vector<std::string>& label_ids,
                                 std::string taxonomy_version, std::span<const std::string> train_texts,
                                 std::span<const LabelVector> train_labels, std::span<const std::string> calib_texts,
                                 std::span<const LabelVector> calib_labels, const FeaturizerConfig& fcfg,
                                 const TrainConfig& tcfg) {
  StudentTrainOutput out;
  out.model = fit_student(task, label_ids, std::move(taxonomy_version), train_texts, train_labels, fcfg, tcfg,
                          &out.train);
  out.thresholds = calib_texts.empty() ? select_thresholds(out.model, train_texts, train_labels)
                                       : select_thresholds(out.model, calib_texts, calib_labels);
  return out;
}

// --- serialization ---------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'C', 'K', 'M', 'O', 'D', 'E', 'L', '\0'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(std::string_view s, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= std::uint64_t{static_cast<unsigned char>(s[pos + i])} << (8 * i);
  return v;
}

}  // namespace

std::string serialize_model(const StudentModel& m) {
  const auto& fc = m.featurizer.config();
  nlohmann::ordered_json h;
  h["format_version"] = kModelFormatVersion;
  h["task"] = to_string(m.task);
  h["taxonomy_version"] = m.taxonomy_version;
  h["label_ids"] = m.label_ids;
  h["num_labels"] = m.label_ids.size();
  h["hash_dims"] = fc.hash_dims;
  h["hash_seed"] = fc.hash_seed;
  h["featurizer"] = featurizer_config_to_json(fc);
  h["thresholds"] = m.thresholds;
  h["biases"] = m.linear.b;
  h["has_idf"] = !m.featurizer.idf().empty();
  h["meta"] = m.meta;
  const std::string header = h.dump();

  const std::size_t L = m.linear.labels;
  std::string out(kMagic, sizeof kMagic);
  put_u32(out, kModelFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  const std::size_t total_at = out.size();
  put_u32(out, 0);  // total file length, patched below
  put_u32(out, 0);
  out += header;
  out.reserve(out.size() + 8 * (m.linear.w.size() + m.featurizer.idf().size()) + 32);
  for (std::size_t c = 0; c < L; ++c) {
    for (std::uint32_t f = 0; f < m.linear.dims; ++f) put_f64(out, m.linear.at(f, c));
  }
  for (double v : m.featurizer.idf()) put_f64(out, v);
  const std::uint64_t total = out.size() + 32;
  for (int i = 0; i < 8; ++i) out[total_at + i] = static_cast<char>((total >> (8 * i)) & 0xFF);
  const auto digest = sha256(out);
  out.append(reinterpret_cast<const char*>(digest.data()), digest.size());
  return out;
}

StudentModel parse_model(std::string_view bytes) {
  // magic, u32 version, u32 header length, u64 total length
  constexpr std::size_t kFixed = sizeof kMagic + 16;
  if (bytes.size() < kFixed + 32 || bytes.substr(0, sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) {
    throw FormatError("invalid_model", "not a model file (bad magic or too short)");
  }
  const auto version = static_cast<std::uint32_t>(get_le(bytes, 8, 4));
  if (version != kModelFormatVersion) {
    throw VersionMismatchError("model format version " + std::to_string(version) + " is not supported (expected " +
                               std::to_string(kModelFormatVersion) + ")");
  }
  // a short file is a format problem; same-length damage is caught by the digest
  if (get_le(bytes, 16, 8) != bytes.size()) throw FormatError("invalid_model", "model file is truncated or has trailing bytes");
  const std::string_view body = bytes.substr(0, bytes.size() - 32);
  const auto digest = sha256(body);
  if (std::memcmp(digest.data(), bytes.data() + body.size(), 32) != 0) {
    throw IntegrityError("model checksum mismatch: file is corrupted or truncated");
  }
  const auto header_len = static_cast<std::size_t>(get_le(bytes, 12, 4));
  if (kFixed + header_len > body.size()) throw FormatError("invalid_model", "header length exceeds file size");

  StudentModel m;
  try {
    const auto h = nlohmann::json::parse(body.substr(kFixed, header_len));
    const std::string task = h.at("task").get<std::string>();
    if (task != "relevance" && task != "multilabel") throw FormatError("invalid_model", "unknown task '" + task + "'");
    m.task = task == "relevance" ? StudentTask::relevance : StudentTask::multilabel;
    m.taxonomy_version = h.at("taxonomy_version").get<std::string>();
    m.label_ids = h.at("label_ids").get<std::vector<std::string>>();
    const FeaturizerConfig fc = featurizer_config_from_json(h.at("featurizer"));
    m.featurizer = Featurizer(fc);
    m.thresholds = h.at("thresholds").get<std::vector<double>>();
    m.linear = LinearModel(fc.hash_dims, m.label_ids.size());
    m.linear.b = h.at("biases").get<std::vector<double>>();
    m.meta = h.value("meta", nlohmann::json::object());
    const bool has_idf = h.at("has_idf").get<bool>();
    if (h.at("num_labels").get<std::size_t>() != m.label_ids.size() || m.thresholds.size() != m.label_ids.size() ||
        m.linear.b.size() != m.label_ids.size()) {
      throw FormatError("invalid_model", "label count is inconsistent");
    }
    const std::size_t L = m.label_ids.size();
    const std::size_t nweights = std::size_t{fc.hash_dims} * L;
    const std::size_t nidf = has_idf ? fc.hash_dims : 0;
    std::size_t pos = kFixed + header_len;
    if (body.size() - pos != 8 * (nweights + nidf)) throw FormatError("invalid_model", "payload size mismatch");
    for (std::size_t c = 0; c < L; ++c) {
      for (std::uint32_t f = 0; f < fc.hash_dims; ++f, pos += 8) {
        m.linear.at(f, c) = std::bit_cast<double>(get_le(body, pos, 8));
      }
    }
    if (has_idf) {
      std::vector<double> idf(nidf);
      for (auto& v : idf) {
        v = std::bit_cast<double>(get_le(body, pos, 8));
        pos += 8;
      }
      m.featurizer.set_idf(std::move(idf));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("invalid_model", std::string("malformed model header: ") + e.what());
  }
  return m;
}

void save_model(const StudentModel& m, const std::filesystem::path& path) { write_file_atomic(path, serialize_model(m)); }

StudentModel load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

}  // namespace concernkit
