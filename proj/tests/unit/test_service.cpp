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

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "concernkit/error.hpp"
#include "concernkit/analytics.hpp"
#include "concernkit/jobs.hpp"
#include "concernkit/persistence.hpp"
#include "concernkit/pipeline.hpp"
#include "concernkit/service.hpp"
#include "concernkit/hash.hpp"
#include "concernkit/teacher.hpp"
#include "doctest.h"
#include "httplib.h"
#include "contract.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace concernkit;
using nlohmann::json;

namespace {

json fixture_json(const std::string& name) {
  std::ifstream in(cktest::fixture("api/" + name));
  REQUIRE_MESSAGE(in.good(), "missing fixture " << name);
  return json::parse(in);
}

// Responses are compared structurally with recorded fixtures; CK_RECORD_FIXTURES=1 rewrites them.
void check_contract(const std::string& name, const std::string& body) {
  const json got = json::parse(body);
  if (std::getenv("CK_RECORD_FIXTURES")) {
    std::ofstream(cktest::fixture("api/" + name)) << got.dump(2) << "\n";
    return;
  }
  const auto m = contract::mismatch(got, fixture_json(name));
  CHECK_MESSAGE(m.empty(), name << ": " << m);
}

ServiceDeps rule_deps() {
  ServiceDeps deps;
  const auto& t = deps.taxonomy;
  deps.model = std::make_shared<CueRuleClassifier>(
      t, std::map<std::string, std::vector<std::string>>{{"2", {"no reason", "don't need"}},
                                                         {"3.1", {"mercury", "thimerosal"}},
                                                         {"3.2", {"autism", "fever"}},
                                                         {"5.1", {"conspiracy", "cover-up"}}});
  deps.interventions = InterventionStore(
      {{"iv-benefit", "Why vaccinate", Audience::patient, "", "Benefits explained.", {"2"}},
       {"iv-ingredients", "What is in a vaccine", Audience::patient, "https://example.org/ingredients", "", {"3", "3.1"}},
       {"iv-side", "Side effects in context", Audience::expert, "", "Rates compared.", {"3", "3.2"}}},
      t);
  deps.fetch = [](const std::string& url, const DocumentMeta& meta) {
    std::ifstream in(cktest::fixture("article.html"));
    std::stringstream ss;
    ss << in.rdbuf();
    DocumentMeta m = meta;
    m.source = SourceKind::url;
    return ingest_text(extract_main_text(ss.str()), m);
  };
  return deps;
}

struct Harness {
  cktest::TempDir dir;
  std::unique_ptr<ApiServer> server;
  std::unique_ptr<httplib::Client> cli;

  explicit Harness(ServiceDeps deps = rule_deps(), std::size_t workers = 2) {
    ServiceConfig cfg;
    cfg.port = 0;
    cfg.data_dir = dir.path();
    cfg.workers = workers;
    server = std::make_unique<ApiServer>(cfg, std::move(deps));
    const int port = server->start();
    cli = std::make_unique<httplib::Client>("127.0.0.1", port);
    cli->set_read_timeout(10, 0);
  }

  httplib::Result post(const std::string& path, const json& body) {
    return cli->Post(path, body.dump(), "application/json");
  }

  json wait_job(const std::string& id) {
    for (int i = 0; i < 500; ++i) {
      auto r = cli->Get("/api/jobs/" + id);
      REQUIRE(r);
      auto j = json::parse(r->body);
      if (j["state"] == "done" || j["state"] == "failed") return j;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    FAIL("job did not finish");
    return {};
  }

  std::string upload_text(const std::string& text, const std::string& id = "", const std::string& date = "") {
    json body{{"text", text}};
    if (!id.empty()) body["id"] = id;
    if (!date.empty()) body["date"] = date;
    auto r = post("/api/upload/text", body);
    REQUIRE(r);
    REQUIRE_MESSAGE(r->status == 202, r->body);
    const std::string job = json::parse(r->body)["job_id"];
    const auto done = wait_job(job);
    REQUIRE_MESSAGE(done["state"] == "done", done.dump());
    return job;
  }
};

}  // namespace

TEST_SUITE("persistence") {
  TEST_CASE("blobs are content addressed") {
    cktest::TempDir dir;
    DataStore store(dir.path());
    const auto h1 = store.put_blob("same bytes");
    const auto h2 = store.put_blob("same bytes");
    CHECK(h1 == h2);
    CHECK(store.blob_count() == 1);
    CHECK(store.get_blob(h1) == "same bytes");
    CHECK(h1 == sha256_hex("same bytes"));
    store.put_blob("other");
    CHECK(store.blob_count() == 2);
    CHECK_THROWS_AS(store.get_blob(std::string(64, '0')), NotFoundError);
  }

  TEST_CASE("tampered blob is detected") {
    cktest::TempDir dir;
    DataStore store(dir.path());
    const auto h = store.put_blob("payload");
    std::ofstream(store.blob_path(h), std::ios::binary) << "PAYLOAD";
    CHECK_THROWS_AS(store.get_blob(h), IntegrityError);
  }

  TEST_CASE("records round trip and detect tampering") {
    cktest::TempDir dir;
    DataStore store(dir.path());
    store.put_record("docs", "a/b:c", {{"x", 1}});
    store.put_record("docs", "plain", {{"x", 2}});
    CHECK((*store.get_record("docs", "a/b:c"))["x"] == 1);
    CHECK_FALSE(store.get_record("docs", "missing"));
    CHECK(store.list_records("docs") == std::vector<std::string>{"a/b:c", "plain"});
    CHECK(store.list_records("nothing").empty());

    auto bytes = read_file(store.record_path("docs", "plain"));
    bytes.replace(bytes.find("2"), 1, "3");
    std::ofstream(store.record_path("docs", "plain"), std::ios::binary) << bytes;
    CHECK_THROWS_AS(store.get_record("docs", "plain"), IntegrityError);
  }

  TEST_CASE("record id encoding") {
    for (std::string id : {"doc-1", "a/b", "..", "x y%z", "ümlaut", ""}) {
      CHECK(decode_record_id(encode_record_id(id)) == id);
      CHECK(encode_record_id(id).find('/') == std::string::npos);
    }
  }

  TEST_CASE("checked wrapper") {
    const auto w = wrap_checked("hello");
    CHECK(unwrap_checked(w, "t") == "hello");
    CHECK_THROWS_AS(unwrap_checked("hello", "t"), IntegrityError);
    auto bad = w;
    bad.back() = 'O';
    CHECK_THROWS_AS(unwrap_checked(bad, "t"), IntegrityError);
  }

  TEST_CASE("atomic write leaves no temp files") {
    cktest::TempDir dir;
    const auto p = dir / "f.txt";
    write_file_atomic(p, "one");
    write_file_atomic(p, "two");
    CHECK(read_file(p) == "two");
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++n;
    CHECK(n == 1);
  }

  TEST_CASE("concurrent writers") {
    cktest::TempDir dir;
    DataStore store(dir.path());
    std::vector<std::thread> ts;
    for (int t = 0; t < 8; ++t) {
      ts.emplace_back([&store, t] {
        for (int i = 0; i < 50; ++i) {
          store.put_blob("shared");
          store.put_record("r", "k" + std::to_string(i), {{"t", t}});
        }
      });
    }
    for (auto& t : ts) t.join();
    CHECK(store.blob_count() == 1);
    CHECK(store.list_records("r").size() == 50);
    for (const auto& id : store.list_records("r")) CHECK_NOTHROW(store.get_record("r", id));
  }
}

TEST_SUITE("jobs") {
  TEST_CASE("lifecycle and progress") {
    cktest::TempDir dir;
    DataStore store(dir.path());
    JobManager jm(store, 2);
    std::vector<double> seen;
    std::mutex mu;
    const auto id = jm.submit(JobKind::classify, [&](JobContext& ctx) {
      for (double f : {0.2, 0.1, 0.5, 2.0}) {
        ctx.progress(f);
        std::lock_guard lk(mu);
        seen.push_back(jm.get(ctx.job_id())->progress);
      }
      return std::string("result-1");
    });
    const auto bad = jm.submit(JobKind::train, [](JobContext&) -> std::string { throw std::runtime_error("boom"); });
    jm.wait_idle();
    CHECK(seen == std::vector<double>{0.2, 0.2, 0.5, 1.0});
    const auto j = *jm.get(id);
    CHECK(j.state == JobState::done);
    CHECK(j.progress == 1.0);
    CHECK(j.result_ref == "result-1");
    const auto f = *jm.get(bad);
    CHECK(f.state == JobState::failed);
    CHECK(f.error == "boom");
    CHECK_FALSE(jm.get("job-999999"));
    // persisted
    CHECK(job_from_json(*store.get_record("jobs", id)).state == JobState::done);
  }

  TEST_CASE("restart marks interrupted jobs failed") {
    cktest::TempDir dir;
    {
      DataStore store(dir.path());
      Job running{"job-000007", JobKind::annotate, JobState::running, 0.4, std::nullopt, std::nullopt};
      Job queued{"job-000008", JobKind::classify, JobState::queued, 0.0, std::nullopt, std::nullopt};
      Job done{"job-000003", JobKind::classify, JobState::done, 1.0, std::string("x"), std::nullopt};
      for (const auto& j : {running, queued, done}) store.put_record("jobs", j.job_id, job_to_json(j));
    }
    DataStore store(dir.path());
    JobManager jm(store, 1);
    CHECK(jm.recovered_failed() == 2);
    CHECK(jm.get("job-000007")->state == JobState::failed);
    CHECK(jm.get("job-000007")->error.has_value());
    CHECK(jm.get("job-000008")->state == JobState::failed);
    CHECK(jm.get("job-000003")->state == JobState::done);
    CHECK(job_from_json(*store.get_record("jobs", "job-000007")).state == JobState::failed);
    // new ids do not collide with recovered ones
    CHECK(jm.submit(JobKind::trend, [](JobContext&) { return std::string(); }) == "job-000009");
    jm.wait_idle();
  }

  TEST_CASE("enum strings") {
    for (auto k : {JobKind::ingest, JobKind::annotate, JobKind::train, JobKind::classify, JobKind::trend}) {
      CHECK(job_kind_from_string(to_string(k)) == k);
    }
    CHECK_THROWS_AS(job_kind_from_string("nope"), FormatError);
  }
}

TEST_SUITE("pipeline") {
  TEST_CASE("article labels are the OR of passage labels") {
    const auto& t = default_taxonomy();
    const CueRuleClassifier model(t, {{"3.1", {"mercury"}}, {"5.1", {"conspiracy"}}});
    const auto doc = ingest_text("Mercury is in there.\n\nIt is a conspiracy.\n\nNice day.", {.id = std::string("d")});
    const auto cd = classify_document(doc, model, t.size());
    REQUIRE(cd.passages.size() == 3);
    CHECK(label_set(cd.labels, t) == std::vector<std::string>{"3", "3.1", "5", "5.1"});
    CHECK(article_invariant_holds(cd));
    auto broken = cd;
    broken.labels.set(0, true);
    CHECK_FALSE(article_invariant_holds(broken));

    const auto back = classified_document_from_json(json(classified_document_to_json(cd, t)), t);
    CHECK(back.labels == cd.labels);
    CHECK(back.passages.size() == 3);
    CHECK(back.passages[1].passage.text == cd.passages[1].passage.text);
  }

  TEST_CASE("random documents satisfy the invariant") {
    const auto& t = default_taxonomy();
    const CueRuleClassifier model(t, {{"1.1", {"alpha"}}, {"2.1", {"beta"}}, {"3.2", {"gamma"}}, {"4.1", {"delta"}}});
    std::mt19937_64 rng(9);
    const char* words[] = {"alpha", "beta", "gamma", "delta", "plain", "words"};
    for (int d = 0; d < 30; ++d) {
      std::string body;
      for (int p = 0; p < 1 + static_cast<int>(rng() % 6); ++p) {
        for (int w = 0; w < 5; ++w) body += std::string(words[rng() % 6]) + " ";
        body += ".\n\n";
      }
      const auto cd = classify_document(ingest_text(body), model, t.size(), 2);
      std::vector<LabelVector> ps;
      for (const auto& p : cd.passages) ps.push_back(p.result.labels);
      CHECK(cd.labels == oracle::fold_max(ps));
    }
  }

  TEST_CASE("trend input ordering") {
    const auto& t = default_taxonomy();
    const CueRuleClassifier model(t, {});
    std::vector<ClassifiedDocument> docs;
    for (auto [id, date] : {std::pair{"b", "2021-01-02"}, {"a", "2021-01-02"}, {"c", "2021-01-01"}, {"u", ""}}) {
      DocumentMeta m{.id = std::string(id), .date = Date::parse(date)};
      docs.push_back(classify_document(ingest_text("text", m), model, t.size()));
    }
    const auto arts = articles_for_trends(docs);
    REQUIRE(arts.size() == 3);
    CHECK(arts[0].doc_id == "c");
    CHECK(arts[1].doc_id == "a");
    CHECK(arts[2].doc_id == "b");
  }
}

TEST_SUITE("service") {
  TEST_CASE("config from file and environment") {
    cktest::TempDir dir;
    std::ofstream(dir / "c.json") << R"({"port": 9001, "workers": 3, "teacher": {"model": "m"}})";
    auto c = ServiceConfig::load(dir / "c.json");
    CHECK(c.port == 9001);
    CHECK(c.workers == 3);
    CHECK(c.teacher.model_name == "m");
    ::setenv("CONCERNKIT_PORT", "9002", 1);
    ::setenv("CONCERNKIT_WORKERS", "5", 1);
    c.apply_environment();
    ::unsetenv("CONCERNKIT_PORT");
    ::unsetenv("CONCERNKIT_WORKERS");
    CHECK(c.port == 9002);
    CHECK(c.workers == 5);
    CHECK_THROWS_AS(ServiceConfig::from_json({{"bogus", 1}}), ValidationError);
    CHECK_THROWS_AS(ServiceConfig::from_json({{"workers", 0}}), ValidationError);
  }

  TEST_CASE("health and taxonomy") {
    Harness h;
    auto r = h.cli->Get("/api/health");
    REQUIRE(r);
    CHECK(r->status == 200);
    check_contract("health.json", r->body);
    auto t = h.cli->Get("/api/taxonomy");
    REQUIRE(t);
    CHECK(t->status == 200);
    CHECK(json::parse(t->body)["nodes"].size() == 24);
  }

  TEST_CASE("upload text and read back the document") {
    Harness h;
    auto r = h.post("/api/upload/text", {{"text", "I don't need the vaccine! No reason to get it"}, {"id", "doc-q"}, {"date", "2021-04-01"}});
    REQUIRE(r);
    CHECK(r->status == 202);
    check_contract("upload_accepted.json", r->body);
    const std::string job = json::parse(r->body)["job_id"];
    const auto done = h.wait_job(job);
    CHECK(done["state"] == "done");
    CHECK(done["progress"] == 1.0);
    check_contract("job_done.json", done.dump());

    auto d = h.cli->Get("/api/documents/doc-q");
    REQUIRE(d);
    CHECK(d->status == 200);
    check_contract("document.json", d->body);
    const auto doc = json::parse(d->body);
    const auto concerns = doc["concerns"].get<std::vector<std::string>>();
    CHECK(std::find(concerns.begin(), concerns.end(), "2") != concerns.end());
    CHECK(doc["labels"]["2"] == 1);
    // stored raw text is content addressed
    CHECK(h.server->store().get_blob(doc["raw_blob"]) == "I don't need the vaccine! No reason to get it");
  }

  TEST_CASE("article labels equal the OR of passage labels through the API") {
    Harness h;
    const auto job = h.upload_text("Mercury inside.\n\nA total cover-up.\n\nFine weather.", "doc-or");
    const auto doc = json::parse(h.cli->Get("/api/documents/doc-or")->body);
    const auto& t = h.server->taxonomy();
    for (std::size_t c = 0; c < t.size(); ++c) {
      int any = 0;
      for (const auto& p : doc["passages"]) any |= p["labels"][t.node(c).id].get<int>();
      CHECK(doc["labels"][t.node(c).id] == any);
    }
    CHECK(doc["concerns"] == json({"3", "3.1", "5", "5.1"}));
  }

  TEST_CASE("tampered stored document is refused") {
    Harness h;
    h.upload_text("Mercury inside.", "doc-t");
    // flip the article labels while keeping a valid checksum
    auto rec = *h.server->store().get_record("documents", "doc-t");
    rec["labels"]["3.1"] = 0;
    h.server->store().put_record("documents", "doc-t", rec);
    auto r = h.cli->Get("/api/documents/doc-t");
    REQUIRE(r);
    CHECK(r->status == 500);
    CHECK(json::parse(r->body)["code"] == "invariant_violation");
  }

  TEST_CASE("errors") {
    Harness h;
    auto r = h.cli->Get("/api/jobs/nope");
    REQUIRE(r);
    CHECK(r->status == 404);
    CHECK(json::parse(r->body)["code"] == "job_not_found");
    check_contract("error.json", r->body);
    CHECK(h.cli->Get("/api/documents/nope")->status == 404);
    CHECK(h.cli->Get("/api/summary/nope")->status == 404);
    CHECK(h.cli->Get("/api/annotations/nope")->status == 404);
    CHECK(json::parse(h.cli->Get("/api/no/such/route")->body)["code"] == "not_found");

    auto bad = h.cli->Post("/api/upload/text", "{", "application/json");
    CHECK(bad->status == 400);
    CHECK(json::parse(bad->body)["code"] == "invalid_json");
    CHECK(json::parse(h.post("/api/upload/text", {{"txt", "x"}})->body)["code"] == "missing_field");
    CHECK(json::parse(h.post("/api/upload/text", {{"text", "   "}})->body)["code"] == "empty_input");
    CHECK(json::parse(h.post("/api/upload/text", {{"text", "x"}, {"date", "2021-13-01"}})->body)["code"] ==
          "invalid_date");
    CHECK(json::parse(h.post("/api/upload/url", {{"url", "ftp://x"}})->body)["code"] == "invalid_url");
    CHECK(json::parse(h.cli->Get("/api/trends?window=0")->body)["code"] == "invalid_parameter");
    CHECK(json::parse(h.cli->Get("/api/trends?format=xml")->body)["code"] == "invalid_parameter");
    CHECK(json::parse(h.cli->Get("/api/events/compare")->body)["code"] == "missing_field");
    CHECK(h.post("/api/annotate", {{"job_id", "x"}})->status == 503);
  }

  TEST_CASE("no model configured") {
    ServiceDeps deps;
    Harness h(std::move(deps));
    auto r = h.post("/api/upload/text", {{"text", "hello"}});
    CHECK(r->status == 503);
    CHECK(json::parse(r->body)["code"] == "model_not_loaded");
    CHECK(json::parse(h.cli->Get("/api/health")->body)["model_loaded"] == false);
  }

  TEST_CASE("upload url with a fixture fetcher") {
    Harness h;
    auto r = h.post("/api/upload/url", {{"url", "https://news.example/article"}, {"date", "2021-05-01"}});
    REQUIRE(r);
    CHECK(r->status == 202);
    const auto done = h.wait_job(json::parse(r->body)["job_id"]);
    REQUIRE(done["state"] == "done");
    const std::string id = done["result_ref"];
    const auto doc = json::parse(h.cli->Get("/api/documents/" + id)->body);
    CHECK(doc["source"] == "url");
    CHECK(doc["url"] == "https://news.example/article");
    CHECK(doc["published_at"] == "2021-05-01");
  }

  TEST_CASE("upload file") {
    Harness h;
    std::ifstream in(cktest::fixture("records.jsonl"));
    std::stringstream ss;
    ss << in.rdbuf();
    auto r = h.cli->Post("/api/upload/file?format=jsonl", ss.str(), "application/octet-stream");
    REQUIRE(r);
    CHECK(r->status == 202);
    const auto done = h.wait_job(json::parse(r->body)["job_id"]);
    CHECK(done["state"] == "done");
    CHECK(done["documents"] == json({"a1", "a2", "a3"}));

    httplib::MultipartFormDataItems items = {{"file", ss.str(), "records.jsonl", "application/octet-stream"},
                                             {"format", "jsonl", "", ""}};
    auto m = h.cli->Post("/api/upload/file", items);
    REQUIRE(m);
    CHECK(m->status == 202);
    CHECK(h.wait_job(json::parse(m->body)["job_id"])["state"] == "done");

    auto missing = h.cli->Post("/api/upload/file", "x", "text/plain");
    CHECK(json::parse(missing->body)["code"] == "missing_field");
  }

  TEST_CASE("summary") {
    Harness h;
    const auto job = h.upload_text("Mercury and thimerosal.\n\nMore mercury talk.\n\nNothing here.", "doc-s");
    auto r = h.cli->Get("/api/summary/" + job);
    REQUIRE(r);
    CHECK(r->status == 200);
    check_contract("summary.json", r->body);
    const auto s = json::parse(r->body);
    const auto& t = h.server->taxonomy();
    const auto c31 = s["concerns"][t.require_index("3.1")];
    CHECK(c31["concern_id"] == "3.1");
    CHECK(c31["passage_count"] == 2);
    CHECK(c31["examples"].size() == 2);
    CHECK(c31["keywords"][0]["term"] == "mercury");
    CHECK(c31["keywords"][0]["count"] == 2);
    CHECK(s["concerns"][t.require_index("1")]["passage_count"] == 0);
  }

  TEST_CASE("interventions query") {
    Harness h;
    auto r = h.post("/api/interventions/query", {{"text", "Thimerosal has mercury"}, {"top_k", 2}});
    REQUIRE(r);
    CHECK(r->status == 200);
    check_contract("interventions_query.json", r->body);
    const auto j = json::parse(r->body);
    CHECK(j["concerns"] == json({"3", "3.1"}));
    REQUIRE(j["matches"].size() == 2);
    CHECK(j["matches"][0]["id"] == "iv-ingredients");
    CHECK(j["matches"][0]["score"] == 1.0);
    CHECK(j["matches"][1]["id"] == "iv-side");

    const auto none = json::parse(h.post("/api/interventions/query", {{"text", "Sunny afternoon"}})->body);
    CHECK(none["no_concerns"] == true);
    CHECK(none["matches"].empty());
    CHECK(h.post("/api/interventions/query", {{"text", "x"}, {"top_k", 0}})->status == 400);
  }

  TEST_CASE("trends and events match the analytics module") {
    Harness h;
    const char* texts[] = {"Mercury inside.", "Nothing.", "A cover-up.", "Mercury and a cover-up.", "Calm."};
    for (int i = 0; i < 10; ++i) {
      char date[16];
      std::snprintf(date, sizeof date, "2021-03-%02d", 1 + i);
      h.upload_text(texts[i % 5], "d" + std::to_string(i), date);
    }
    h.upload_text("Undated mercury.", "undated");

    // expected output computed straight from the stored documents
    std::vector<ClassifiedDocument> docs;
    for (const auto& id : h.server->store().list_records("documents")) {
      docs.push_back(classified_document_from_json(*h.server->store().get_record("documents", id), h.server->taxonomy()));
    }
    const auto arts = articles_for_trends(docs);
    REQUIRE(arts.size() == 10);
    const auto ids = h.server->taxonomy().ids();

    auto csv = h.cli->Get("/api/trends?window=3&format=csv");
    REQUIRE(csv);
    CHECK(csv->status == 200);
    CHECK(csv->body == trends_to_csv(rolling_average(arts, ids, {.window = 3})));

    auto js = h.cli->Get("/api/trends?window=3&partial=true");
    check_contract("trends.json", js->body);
    CHECK(json::parse(js->body)["series"] ==
          json(trends_to_json(rolling_average(arts, ids, {.window = 3, .emit_partial = true}))));

    auto ranged = h.cli->Get("/api/trends?window=2&format=csv&from=2021-03-03&to=2021-03-06");
    std::vector<ArticleLabel> sub(arts.begin() + 2, arts.begin() + 6);
    CHECK(ranged->body == trends_to_csv(rolling_average(sub, ids, {.window = 2})));

    auto ev = h.cli->Get("/api/events/compare?date=2021-03-06&pre_days=5&post_days=5");
    REQUIRE(ev);
    CHECK(ev->status == 200);
    check_contract("events.json", ev->body);
    CHECK(json::parse(ev->body) ==
          json(event_comparison_to_json(event_comparison(arts, ids, *Date::parse("2021-03-06"), 5, 5))));

    auto empty = h.cli->Get("/api/events/compare?date=2030-01-01");
    CHECK(empty->status == 422);
    CHECK(json::parse(empty->body)["code"] == "insufficient_data");
  }

  TEST_CASE("annotate through the API uses the cache") {
    auto deps = rule_deps();
    const auto& t = deps.taxonomy;
    const auto answer = format_multilabel_response(labels_from_ids({"1", "1.1", "3", "3.2"}, t), t);
    auto teacher = std::make_shared<ScriptedTeacher>([answer](const std::string&, std::size_t) { return answer; });
    deps.teacher = teacher;
    Harness h(std::move(deps));
    const auto up = h.upload_text("First paragraph.\n\nSecond paragraph.", "doc-a");
    auto run = [&] {
      auto r = h.post("/api/annotate", {{"job_id", up}});
      REQUIRE(r);
      REQUIRE(r->status == 202);
      const std::string job = json::parse(r->body)["job_id"];
      REQUIRE(h.wait_job(job)["state"] == "done");
      return json::parse(h.cli->Get("/api/annotations/" + job)->body);
    };
    const auto first = run();
    CHECK(first["report"]["teacher_calls"] == 2);
    CHECK(first["records"].size() == 2);
    const auto& st = h.server->taxonomy();
    CHECK(first["records"][0]["labels"] == json(labels_to_json(labels_from_ids({"1", "1.1", "3", "3.2"}, st), st)));
    const auto second = run();
    CHECK(second["report"]["teacher_calls"] == 0);
    CHECK(second["report"]["cache_hits"] == 2);
    CHECK(teacher->calls() == 2);
  }

  TEST_CASE("restart with a job in flight") {
    cktest::TempDir dir;
    {
      DataStore store(dir.path());
      store.put_record("jobs", "job-000001",
                       job_to_json({"job-000001", JobKind::classify, JobState::running, 0.3, std::nullopt, std::nullopt}));
    }
    ServiceConfig cfg;
    cfg.port = 0;
    cfg.data_dir = dir.path();
    ApiServer server(cfg, rule_deps());
    httplib::Client cli("127.0.0.1", server.start());
    const auto j = json::parse(cli.Get("/api/jobs/job-000001")->body);
    CHECK(j["state"] == "failed");
    CHECK(j.contains("error"));
  }

  TEST_CASE("concurrent uploads") {
    Harness h(rule_deps(), 4);
    std::vector<std::thread> ts;
    std::atomic<int> ok{0};
    for (int t = 0; t < 8; ++t) {
      ts.emplace_back([&, t] {
        httplib::Client c(h.cli->host(), h.cli->port());
        auto r = c.Post("/api/upload/text", json({{"text", "Mercury " + std::to_string(t)}}).dump(), "application/json");
        if (r && r->status == 202) ++ok;
      });
    }
    for (auto& t : ts) t.join();
    CHECK(ok == 8);
    h.server->jobs().wait_idle();
    CHECK(h.server->store().list_records("documents").size() == 8);
  }
}
