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

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "concernkit/error.hpp"
#include "concernkit/evaluation.hpp"
#include "concernkit/taxonomy.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace concernkit;

TEST_SUITE("evaluation") {
  TEST_CASE("harmonic mean consistency with reported rows") {
    // P and R as reported; F1 from the definition.
    auto f1 = [](double p, double r) { return 2 * p * r / (p + r); };
    CHECK(std::abs(f1(0.981, 0.969) - 0.975) <= 0.001);
    CHECK(std::abs(f1(0.969, 0.960) - 0.964) <= 0.001);
  }

  TEST_CASE("identity") {
    const std::vector<bool> g = {true, false, true, true, false};
    const auto m = binary_metrics(g, g);
    CHECK(m.accuracy == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
  }

  TEST_CASE("zero division is zero with a flag") {
    const auto m = binary_metrics(std::vector<bool>{true, true, false}, std::vector<bool>{false, false, false});
    CHECK(m.recall == 0.0);
    CHECK(m.precision == 0.0);
    CHECK(m.precision_undefined);
    CHECK_FALSE(m.recall_undefined);
    CHECK(m.f1 == 0.0);
    const auto none = binary_metrics(0, 0, 0, 5);
    CHECK(none.f1_undefined);
    CHECK(none.accuracy == 1.0);
  }

  TEST_CASE("length mismatch") {
    CHECK_THROWS_AS(binary_metrics(std::vector<bool>{true}, std::vector<bool>{true, false}), ValidationError);
    CHECK_THROWS_AS(binary_metrics(std::vector<bool>{}, std::vector<bool>{}), ValidationError);
  }

  TEST_CASE("random binary instances equal the counting oracle") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 250; ++trial) {
      const std::size_t n = 1 + rng() % 60;
      std::vector<bool> g(n), p(n);
      for (std::size_t i = 0; i < n; ++i) {
        g[i] = rng() % 3 == 0;
        p[i] = rng() % 2 == 0;
      }
      const auto m = binary_metrics(g, p);
      const auto o = oracle::binary(g, p);
      CHECK(m.tp == o.tp);
      CHECK(m.fp == o.fp);
      CHECK(m.fn == o.fn);
      CHECK(m.tn == o.tn);
      CHECK(std::abs(m.accuracy - o.accuracy) <= 1e-12);
      CHECK(std::abs(m.precision - o.precision) <= 1e-12);
      CHECK(std::abs(m.recall - o.recall) <= 1e-12);
      CHECK(std::abs(m.f1 - o.f1) <= 1e-12);
    }
  }

  TEST_CASE("multilabel identity when every label has support") {
    std::mt19937_64 rng(5);
    const std::size_t L = 24;
    std::vector<LabelVector> gold;
    for (std::size_t i = 0; i < 60; ++i) {
      LabelVector v(L);
      v.set(i % L);
      for (std::size_t c = 0; c < L; ++c) {
        if (rng() % 5 == 0) v.set(c);
      }
      gold.push_back(v);
    }
    const auto r = multilabel_report(gold, gold, default_taxonomy().ids());
    for (const auto* a : {&r.micro, &r.macro, &r.weighted, &r.samples}) {
      CHECK(a->precision == 1.0);
      CHECK(a->recall == 1.0);
      CHECK(a->f1 == 1.0);
    }
    for (const auto& m : r.per_label) CHECK(m.f1 == 1.0);
  }

  TEST_CASE("identity with a zero-support label") {
    std::vector<LabelVector> gold = {LabelVector({1, 0, 0}), LabelVector({1, 1, 0})};
    const auto r = multilabel_report(gold, gold, {"a", "b", "c"});
    CHECK(r.per_label[0].f1 == 1.0);
    CHECK(r.per_label[1].f1 == 1.0);
    CHECK(r.per_label[2].f1 == 0.0);
    CHECK(r.per_label[2].f1_undefined);
    CHECK(r.micro.f1 == 1.0);
    CHECK(r.weighted.f1 == 1.0);
    CHECK(r.samples.f1 == 1.0);
    CHECK(r.macro.f1 == doctest::Approx(2.0 / 3.0));
    const auto excl = multilabel_report(gold, gold, {"a", "b", "c"}, {.macro_include_zero_support = false});
    CHECK(excl.macro.f1 == 1.0);
  }

  TEST_CASE("half of two gold labels") {
    const auto r = multilabel_report({LabelVector({1, 1, 0, 0})}, {LabelVector({1, 0, 0, 0})}, {"a", "b", "c", "d"});
    CHECK(r.samples.precision == 1.0);
    CHECK(r.samples.recall == 0.5);
    CHECK(r.samples.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  }

  TEST_CASE("random multilabel reports equal the brute-force oracle") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 220; ++trial) {
      const std::size_t L = trial < 50 ? 24 : 1 + rng() % 30;
      const std::size_t n = 1 + rng() % 40;
      std::vector<LabelVector> g, p;
      for (std::size_t i = 0; i < n; ++i) {
        LabelVector a(L), b(L);
        for (std::size_t c = 0; c < L; ++c) {
          a.set(c, rng() % 4 == 0);
          b.set(c, rng() % 4 == 0);
        }
        g.push_back(a);
        p.push_back(b);
      }
      std::vector<std::string> ids;
      for (std::size_t c = 0; c < L; ++c) ids.push_back("l" + std::to_string(c));
      const bool include_zero = trial % 2 == 0;
      const auto r = multilabel_report(g, p, ids, {.macro_include_zero_support = include_zero});
      const auto o = oracle::multilabel(g, p, include_zero);
      auto close = [](const AveragedMetrics& a, const oracle::Avg& b) {
        CHECK(std::abs(a.precision - b.p) <= 1e-9);
        CHECK(std::abs(a.recall - b.r) <= 1e-9);
        CHECK(std::abs(a.f1 - b.f) <= 1e-9);
      };
      close(r.micro, o.micro);
      close(r.macro, o.macro);
      close(r.weighted, o.weighted);
      close(r.samples, o.samples);
      std::size_t support = 0;
      for (const auto& m : r.per_label) support += m.support();
      CHECK(support == r.total_support);
    }
  }

  TEST_CASE("invariants") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t L = 6, n = 30;
      std::vector<LabelVector> g, p;
      for (std::size_t i = 0; i < n; ++i) {
        LabelVector a(L), b(L);
        for (std::size_t c = 0; c < L; ++c) {
          a.set(c, rng() % 3 == 0);
          b.set(c, rng() % 3 == 0);
        }
        g.push_back(a);
        p.push_back(b);
      }
      const std::vector<std::string> ids = {"a", "b", "c", "d", "e", "f"};
      const auto r = multilabel_report(g, p, ids);
      double lo = 1.0, hi = 0.0;
      for (const auto& m : r.per_label) {
        lo = std::min(lo, m.f1);
        hi = std::max(hi, m.f1);
      }
      CHECK(r.macro.f1 >= lo - 1e-15);
      CHECK(r.macro.f1 <= hi + 1e-15);

      // reordering samples changes nothing
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<LabelVector> g2, p2;
      for (auto i : perm) {
        g2.push_back(g[i]);
        p2.push_back(p[i]);
      }
      const auto r2 = multilabel_report(g2, p2, ids);
      CHECK(std::abs(r2.samples.f1 - r.samples.f1) <= 1e-12);
      CHECK(r2.micro.f1 == r.micro.f1);
      for (std::size_t c = 0; c < L; ++c) CHECK(r2.per_label[c].f1 == r.per_label[c].f1);

      // concatenation pools micro counts
      std::vector<LabelVector> gg = g, pp = p;
      gg.insert(gg.end(), g2.begin(), g2.end());
      pp.insert(pp.end(), p2.begin(), p2.end());
      const auto rc = multilabel_report(gg, pp, ids);
      for (std::size_t c = 0; c < L; ++c) CHECK(rc.per_label[c].tp == 2 * r.per_label[c].tp);
      CHECK(std::abs(rc.micro.f1 - r.micro.f1) <= 1e-12);
    }
  }

  TEST_CASE("symmetric errors give micro P = R = F1") {
    // every false positive paired with a false negative
    std::vector<LabelVector> g = {LabelVector({1, 0, 1}), LabelVector({0, 1, 0}), LabelVector({1, 1, 0})};
    std::vector<LabelVector> p = {LabelVector({0, 1, 1}), LabelVector({1, 0, 0}), LabelVector({1, 1, 0})};
    const auto r = multilabel_report(g, p, {"a", "b", "c"});
    CHECK(r.micro.precision == doctest::Approx(r.micro.recall).epsilon(1e-15));
    CHECK(r.micro.f1 == doctest::Approx(r.micro.precision).epsilon(1e-15));
  }

  TEST_CASE("constant negative model") {
    std::vector<LabelVector> g = {LabelVector({1, 0}), LabelVector({0, 1})};
    std::vector<LabelVector> p(2, LabelVector(2));
    const auto r = multilabel_report(g, p, {"a", "b"});
    for (const auto& m : r.per_label) {
      CHECK(m.recall == 0.0);
      CHECK(m.precision == 0.0);
      CHECK(m.precision_undefined);
    }
    CHECK(r.micro.recall == 0.0);
  }

  TEST_CASE("shape mismatch") {
    CHECK_THROWS_AS(multilabel_report({LabelVector(2)}, {LabelVector(3)}, {"a", "b"}), ValidationError);
    CHECK_THROWS_AS(multilabel_report({LabelVector(2)}, {}, {"a", "b"}), ValidationError);
    CHECK_THROWS_AS(multilabel_report({}, {}, {"a"}), ValidationError);
  }

  TEST_CASE("exports") {
    const auto r = multilabel_report({LabelVector({1, 0}), LabelVector({1, 1})}, {LabelVector({1, 0}), LabelVector({0, 1})},
                                     {"1", "1.1"});
    const auto j = report_to_json(r);
    CHECK(j["labels"].size() == 2);
    CHECK(j["labels"]["1"]["support"] == 2);
    CHECK(j["labels"]["1.1"]["tp"] == 1);
    for (const char* k : {"micro", "macro", "weighted", "samples"}) CHECK(j.contains(k));

    const auto csv = report_to_csv(r);
    std::istringstream in(csv);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    REQUIRE(lines.size() == 1 + 2 + 4);
    CHECK(lines[0] == "label,precision,recall,f1,support");
    CHECK(lines[1].rfind("1,", 0) == 0);
    CHECK(lines[3].rfind("micro avg,", 0) == 0);
    CHECK(lines[6].rfind("samples avg,", 0) == 0);
    CHECK(report_to_text(r).find("samples") != std::string::npos);
  }
}

TEST_SUITE("threshold selection") {
  TEST_CASE("separable label reaches F1 = 1") {
    const std::vector<std::vector<double>> s = {{0.9}, {0.8}, {0.3}, {0.1}};
    const std::vector<LabelVector> g = {oracle::bit(1), oracle::bit(1), oracle::bit(0), oracle::bit(0)};
    const auto sel = best_f1_thresholds(s, g, true);
    CHECK(sel.f1[0] == 1.0);
    CHECK(sel.thresholds[0] == 0.5);  // 0.5 and 0.8 tie; the lower one wins
  }

  TEST_CASE("constant predictions without positives keep 0.5") {
    const std::vector<std::vector<double>> s(5, {0.42});
    const std::vector<LabelVector> g(5, oracle::bit(0));
    const auto sel = best_f1_thresholds(s, g, true);
    CHECK(sel.thresholds[0] == 0.5);
    CHECK(sel.defaulted[0]);
  }

  TEST_CASE("random predictions match the exhaustive grid") {
    std::mt19937_64 rng(100);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t n = 100, L = 3;
      std::vector<std::vector<double>> s(n, std::vector<double>(L));
      std::vector<LabelVector> g;
      for (auto& row : s) {
        LabelVector v(L);
        for (std::size_t c = 0; c < L; ++c) {
          row[c] = std::round(u(rng) * 50) / 50;  // coarse grid so ties occur
          v.set(c, u(rng) < 0.3 + 0.3 * row[c]);
        }
        g.push_back(v);
      }
      const auto sel = best_f1_thresholds(s, g, true);
      for (std::size_t c = 0; c < L; ++c) {
        const auto [t, f] = oracle::best_threshold(s, g, c, true);
        CHECK(sel.thresholds[c] == t);
        CHECK(std::abs(sel.f1[c] - f) <= 1e-12);
      }
    }
  }
}
