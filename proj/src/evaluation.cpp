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

#include "concernkit/evaluation.hpp"

#include <algorithm>
#include <cstdio>

#include "concernkit/error.hpp"

namespace concernkit {

namespace {

double ratio(std::size_t num, std::size_t den, bool& undefined) {
  if (den == 0) {
    undefined = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

AveragedMetrics prf(std::size_t tp, std::size_t fp, std::size_t fn) {
  const BinaryMetrics m = binary_metrics(tp, fp, fn);
  return {m.precision, m.recall, m.f1};
}

}  // namespace

BinaryMetrics binary_metrics(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  BinaryMetrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  m.accuracy = ratio(tp + tn, tp + fp + fn + tn, m.accuracy_undefined);
  m.precision = ratio(tp, tp + fp, m.precision_undefined);
  m.recall = ratio(tp, tp + fn, m.recall_undefined);
  // 2PR/(P+R) == 2tp/(2tp+fp+fn), and the latter has no 0/0 through P or R
  m.f1 = ratio(2 * tp, 2 * tp + fp + fn, m.f1_undefined);
  return m;
}

BinaryMetrics binary_metrics(const std::vector<bool>& gold, const std::vector<bool>& pred) {
  if (gold.size() != pred.size()) throw ValidationError("length_mismatch", "gold and pred differ in length");
  if (gold.empty()) throw ValidationError("empty_input", "at least one sample is required");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] && pred[i]) ++tp;
    else if (pred[i]) ++fp;
    else if (gold[i]) ++fn;
    else ++tn;
  }
  return binary_metrics(tp, fp, fn, tn);
}

MultilabelReport multilabel_report(const std::vector<LabelVector>& gold, const std::vector<LabelVector>& pred,
                                   std::vector<std::string> label_ids, const ReportOptions& options) {
  if (gold.size() != pred.size()) throw ValidationError("length_mismatch", "gold and pred differ in length");
  if (gold.empty()) throw ValidationError("empty_input", "at least one sample is required");
  const std::size_t L = label_ids.size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != L || pred[i].size() != L) {
      throw ValidationError("length_mismatch", "row " + std::to_string(i) + " does not have " + std::to_string(L) +
                                                   " labels");
    }
  }

  MultilabelReport r;
  r.label_ids = std::move(label_ids);
  r.num_samples = gold.size();
  std::vector<std::size_t> tp(L, 0), fp(L, 0), fn(L, 0), tn(L, 0);
  double sp = 0.0, sr = 0.0, sf = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    std::size_t inter = 0, np = 0, ng = 0;
    for (std::size_t c = 0; c < L; ++c) {
      const bool g = gold[i][c], p = pred[i][c];
      inter += g && p;
      np += p;
      ng += g;
      if (g && p) ++tp[c];
      else if (p) ++fp[c];
      else if (g) ++fn[c];
      else ++tn[c];
    }
    bool undef = false;
    sp += ratio(inter, np, undef);
    sr += ratio(inter, ng, undef);
    bool f_undef = false;
    sf += ratio(2 * inter, np + ng, f_undef);
    if (f_undef) ++r.samples_undefined;
  }
  if (r.num_samples > 0) {
    const double n = static_cast<double>(r.num_samples);
    r.samples = {sp / n, sr / n, sf / n};
  }

  std::size_t TP = 0, FP = 0, FN = 0, total_support = 0, macro_n = 0;
  for (std::size_t c = 0; c < L; ++c) {
    r.per_label.push_back(binary_metrics(tp[c], fp[c], fn[c], tn[c]));
    TP += tp[c];
    FP += fp[c];
    FN += fn[c];
    const auto& m = r.per_label.back();
    if (options.macro_include_zero_support || m.support() > 0) {
      r.macro.precision += m.precision;
      r.macro.recall += m.recall;
      r.macro.f1 += m.f1;
      ++macro_n;
    }
    const double s = static_cast<double>(m.support());
    r.weighted.precision += s * m.precision;
    r.weighted.recall += s * m.recall;
    r.weighted.f1 += s * m.f1;
    total_support += m.support();
  }
  r.micro = prf(TP, FP, FN);
  if (macro_n > 0) {
    r.macro.precision /= macro_n;
    r.macro.recall /= macro_n;
    r.macro.f1 /= macro_n;
  }
  r.total_support = total_support;
  if (total_support > 0) {
    const double s = static_cast<double>(total_support);
    r.weighted.precision /= s;
    r.weighted.recall /= s;
    r.weighted.f1 /= s;
  } else {
    r.weighted = {};
  }
  return r;
}

nlohmann::ordered_json report_to_json(const MultilabelReport& r) {
  auto avg = [](const AveragedMetrics& a) {
    return nlohmann::ordered_json{{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
  };
  nlohmann::ordered_json labels = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < r.per_label.size(); ++c) {
    const auto& m = r.per_label[c];
    nlohmann::ordered_json undefined = nlohmann::ordered_json::array();
    if (m.precision_undefined) undefined.push_back("precision");
    if (m.recall_undefined) undefined.push_back("recall");
    if (m.f1_undefined) undefined.push_back("f1");
    labels[r.label_ids[c]] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
                              {"support", m.support()}, {"tp", m.tp},         {"fp", m.fp},
                              {"fn", m.fn},             {"undefined", undefined}};
  }
  return {{"num_samples", r.num_samples},
          {"total_support", r.total_support},
          {"labels", labels},
          {"micro", avg(r.micro)},
          {"macro", avg(r.macro)},
          {"weighted", avg(r.weighted)},
          {"samples", avg(r.samples)},
          {"samples_undefined", r.samples_undefined}};
}

std::string report_to_text(const MultilabelReport& r) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %9s %9s %9s %9s\n", "label", "precision", "recall", "f1", "support");
  out += buf;
  for (std::size_t c = 0; c < r.per_label.size(); ++c) {
    const auto& m = r.per_label[c];
    std::snprintf(buf, sizeof buf, "%-12s %9.4f %9.4f %9.4f %9zu%s\n", r.label_ids[c].c_str(), m.precision, m.recall,
                  m.f1, m.support(), (m.precision_undefined || m.recall_undefined) ? "  (undefined -> 0)" : "");
    out += buf;
  }
  auto row = [&](const char* name, const AveragedMetrics& a) {
    std::snprintf(buf, sizeof buf, "%-12s %9.4f %9.4f %9.4f\n", name, a.precision, a.recall, a.f1);
    out += buf;
  };
  out += "\n";
  row("micro", r.micro);
  row("macro", r.macro);
  row("weighted", r.weighted);
  row("samples", r.samples);
  return out;
}

std::string report_to_csv(const MultilabelReport& r) {
  std::string out = "label,precision,recall,f1,support\n";
  char buf[160];
  for (std::size_t c = 0; c < r.per_label.size(); ++c) {
    const auto& m = r.per_label[c];
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%zu\n", m.precision, m.recall, m.f1, m.support());
    out += r.label_ids[c] + buf;
  }
  auto row = [&](const char* name, const AveragedMetrics& a, std::size_t support) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%zu\n", name, a.precision, a.recall, a.f1, support);
    out += buf;
  };
  row("micro avg", r.micro, r.total_support);
  row("macro avg", r.macro, r.total_support);
  row("weighted avg", r.weighted, r.total_support);
  row("samples avg", r.samples, r.total_support);
  return out;
}

nlohmann::ordered_json binary_metrics_to_json(const BinaryMetrics& m) {
  nlohmann::ordered_json undefined = nlohmann::ordered_json::array();
  if (m.accuracy_undefined) undefined.push_back("accuracy");
  if (m.precision_undefined) undefined.push_back("precision");
  if (m.recall_undefined) undefined.push_back("recall");
  if (m.f1_undefined) undefined.push_back("f1");
  return {{"accuracy", m.accuracy},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"confusion", {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}}},
          {"undefined", undefined}};
}

ThresholdSelection best_f1_thresholds(const std::vector<std::vector<double>>& scores,
                                      const std::vector<LabelVector>& gold, bool include_half) {
  if (scores.size() != gold.size()) throw ValidationError("length_mismatch", "scores and gold differ in length");
  const std::size_t L = gold.empty() ? 0 : gold.front().size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != L || scores[i].size() != L) {
      throw ValidationError("length_mismatch", "row " + std::to_string(i) + " has the wrong width");
    }
  }

  ThresholdSelection sel;
  sel.thresholds.assign(L, 0.5);
  sel.f1.assign(L, 0.0);
  sel.defaulted.assign(L, false);
  std::vector<std::pair<double, bool>> col(gold.size());
  for (std::size_t c = 0; c < L; ++c) {
    std::size_t positives = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      col[i] = {scores[i][c], gold[i][c]};
      positives += gold[i][c];
    }
    if (positives == 0) {
      sel.defaulted[c] = true;
      continue;
    }
    // sweep thresholds from high to low; predicted set = scores >= th
    std::sort(col.begin(), col.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<double> candidates;
    for (const auto& [s, g] : col) candidates.push_back(s);
    if (include_half) candidates.push_back(0.5);
    std::sort(candidates.begin(), candidates.end(), std::greater<>());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::size_t tp = 0, fp = 0, k = 0;
    double best_f1 = -1.0, best_th = 0.5;
    for (double th : candidates) {
      while (k < col.size() && col[k].first >= th) {
        (col[k].second ? tp : fp)++;
        ++k;
      }
      const double f1 = 2.0 * tp / static_cast<double>(2 * tp + fp + (positives - tp));
      if (f1 >= best_f1) {  // descending sweep: '>=' prefers the lower threshold on ties
        best_f1 = f1;
        best_th = th;
      }
    }
    sel.thresholds[c] = best_th;
    sel.f1[c] = best_f1;
  }
  return sel;
}

}  // namespace concernkit
