#include <chrono>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "doctest.h"
#include "reflist.hpp"
#include "surveykg/error.hpp"
#include "surveykg/extract/extract.hpp"
#include "surveykg/format/table.hpp"
#include "surveykg/layout/layout.hpp"
#include "surveykg/refs/metadata.hpp"
#include "surveykg/refs/refs.hpp"

using namespace surveykg;
using namespace surveykg::refs;
using surveykg::testing::RefListDraw;
using surveykg::testing::RefMarker;
using nlohmann::json;

namespace {

Errc error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::UsageError;
}

json load_json(const std::string& name) {
  std::ifstream in(std::string(SURVEYKG_TEST_DATA) + "/" + name);
  REQUIRE(in);
  return json::parse(in);
}

layout::Document reflist_doc(const RefListDraw& d, const std::vector<std::string>& entries) {
  return layout::load_document_from_memory(testing::reference_list_pdf(d, entries), "reflist.pdf");
}

BibEntry entry(std::vector<std::string> authors, std::optional<int> year, std::optional<CitationKey> key = {}) {
  BibEntry e;
  e.raw = "fixture";
  e.authors = std::move(authors);
  e.year = year;
  e.key = std::move(key);
  return e;
}

format::SurveyTable keyed_table(const std::vector<std::string>& keys) {
  std::vector<std::vector<std::string>> rows = {{"Reference", "Method"}};
  for (std::size_t i = 0; i < keys.size(); ++i) rows.push_back({keys[i], "m" + std::to_string(i)});
  return format::from_grid(extract::grid_from_texts(rows));
}

}  // namespace

TEST_CASE("parse_citation_key forms") {
  CHECK(parse_citation_key("[12]") == CitationKey{NumericKey{12}});
  CHECK(parse_citation_key("12") == CitationKey{NumericKey{12}});
  CHECK(parse_citation_key("(12)") == CitationKey{NumericKey{12}});
  CHECK(parse_citation_key(" [ 7 ] ") == CitationKey{NumericKey{7}});
  const CitationKey smith = AuthorYearKey{"smith", 2010, std::nullopt};
  CHECK(parse_citation_key("Smith et al. (2010)") == smith);
  CHECK(parse_citation_key("Smith et al., 2010") == smith);
  CHECK(parse_citation_key("Smith and Jones 2010") == smith);
  CHECK(parse_citation_key("Smith & Jones, 2010") == smith);
  CHECK(parse_citation_key("Smith 2010a") == CitationKey{AuthorYearKey{"smith", 2010, 'a'}});
  CHECK(parse_citation_key("MÜLLER 2017") == CitationKey{AuthorYearKey{"müller", 2017, std::nullopt}});
  CHECK(parse_citation_key("van der Berg et al., 2020") == CitationKey{AuthorYearKey{"van der berg", 2020, std::nullopt}});
  CHECK(parse_citation_key("doe:2018") == CitationKey{GeneratedKey{"doe", 2018}});

  for (const char* bad : {"see above", "", "   ", "[0]", "[]", "Smith", "Smith 3010", "[1][2]"}) {
    CAPTURE(bad);
    CHECK(error_of([&] { parse_citation_key(bad); }) == Errc::UnrecognizedKeyFormat);
  }
}

TEST_CASE("surname segmentation") {
  const std::vector<std::pair<std::string, std::string>> table = {
      {"Doe, J.", "doe"},
      {"J. Doe", "doe"},
      {"Doe J", "doe"},
      {"Van Der Berg K", "van der berg"},
      {"K. van der Berg", "van der berg"},
      {"van der Berg, Karin", "van der berg"},
      {"Ludwig van Beethoven", "van beethoven"},
      {"Jean-Pierre Dupont", "dupont"},
      {"J.-P. Dupont", "dupont"},
      {"García-López, M. A.", "garcía-lópez"},
      {"Smith et al.", "smith"},
      {"Li", "li"},
      {"O'Neil R", "o'neil"},
  };
  for (const auto& [name, surname] : table) {
    CAPTURE(name);
    CHECK(surname_of(name) == surname);
  }
}

TEST_CASE("render and parse keys are inverse") {
  std::mt19937 rng(7);
  const std::vector<std::string> surnames = {"smith", "van der berg", "müller", "garcía-lópez", "o'neil", "li",
                                             "de la cruz", "ng", "zhang", "østergård"};
  for (int i = 0; i < 1000; ++i) {
    CitationKey k;
    const std::string s = surnames[rng() % surnames.size()];
    const int year = 1000 + static_cast<int>(rng() % 2000);
    switch (rng() % 3) {
      case 0:
        k = NumericKey{1 + static_cast<int>(rng() % 99999)};
        break;
      case 1: {
        AuthorYearKey ay{s, year, std::nullopt};
        if (rng() % 2) ay.suffix = static_cast<char>('a' + rng() % 26);
        k = ay;
        break;
      }
      default:
        k = GeneratedKey{s, year};
    }
    CAPTURE(render_key(k));
    CHECK(parse_citation_key(render_key(k)) == k);
  }
}

TEST_CASE("generate_key") {
  CHECK(generate_key(entry({"Doe, J."}, 2018)) == CitationKey{GeneratedKey{"doe", 2018}});
  CHECK(generate_key(entry({"Van Der Berg K"}, 2020)) == CitationKey{GeneratedKey{"van der berg", 2020}});
  CHECK(error_of([] { generate_key(entry({}, 2018)); }) == Errc::MissingAuthorOrYear);
  CHECK(error_of([] { generate_key(entry({"Doe, J."}, std::nullopt)); }) == Errc::MissingAuthorOrYear);
}

TEST_CASE("parse_citation_string matches the annotated corpus") {
  const json corpus = load_json("citations.json");
  REQUIRE(corpus.size() >= 15);
  for (const auto& c : corpus) {
    const std::string raw = c["raw"];
    CAPTURE(raw);
    const BibEntry e = parse_citation_string(raw);
    CHECK(e.raw == raw);
    CHECK(e.authors == c["authors"].get<std::vector<std::string>>());
    if (c["title"].is_null()) {
      CHECK_FALSE(e.title.has_value());
    } else {
      CHECK(e.title == std::optional<std::string>(c["title"].get<std::string>()));
    }
    if (c["year"].is_null()) {
      CHECK_FALSE(e.year.has_value());
    } else {
      CHECK(e.year == std::optional<int>(c["year"].get<int>()));
    }
    if (c["doi"].is_null()) {
      CHECK_FALSE(e.doi.has_value());
    } else {
      CHECK(e.doi == std::optional<std::string>(c["doi"].get<std::string>()));
    }
    CHECK_FALSE(e.month.has_value());
    CHECK_FALSE(e.key.has_value());
  }
}

TEST_CASE("parse_reference_list segments marked and hanging lists") {
  const std::vector<std::string> three = {
      "J. Doe and A. Roe, \"Layout analysis of scholarly documents,\" IEEE Trans. Doc. Eng., vol. 7, pp. 1-9, 2016.",
      "S. Kim, \"Table detection,\" in Proc. ICDAR, 2015.",
      "P. Lopez, \"GROBID: Combining automatic bibliographic data recognition and term extraction,\" in Proc. ECDL, 2009, pp. 473-474."};

  SUBCASE("bracket markers") {
    const auto entries = parse_reference_list(reflist_doc({RefMarker::Bracket}, three));
    REQUIRE(entries.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(entries[i].key == std::optional<CitationKey>(NumericKey{static_cast<int>(i) + 1}));
      CHECK(entries[i].raw == three[i]);
    }
    CHECK(entries[2].title == std::optional<std::string>(
                                  "GROBID: Combining automatic bibliographic data recognition and term extraction"));
  }
  SUBCASE("dotted markers with a wrapped year") {
    RefListDraw d{RefMarker::Dotted};
    d.width = 180;
    const auto entries = parse_reference_list(reflist_doc(d, three));
    REQUIRE(entries.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(entries[i].key == std::optional<CitationKey>(NumericKey{static_cast<int>(i) + 1}));
      CHECK(entries[i].raw == three[i]);
    }
  }
  SUBCASE("hanging indent has no keys") {
    const std::vector<std::string> ay = {
        "Smith, J., & Jones, K. (2010). Comparing survey methods in many different research fields at once. Journal of Reviews, 4, 33–41.",
        "Kim, S. (2015). Table detection. In Proceedings of ICDAR, 1–5."};
    RefListDraw d{RefMarker::Hanging};
    d.heading = "Bibliography";
    d.width = 250;
    const auto entries = parse_reference_list(reflist_doc(d, ay));
    REQUIRE(entries.size() == 2);
    CHECK_FALSE(entries[0].key.has_value());
    CHECK(entries[0].raw == ay[0]);
    CHECK(entries[1].raw == ay[1]);
    CHECK(entries[1].authors == std::vector<std::string>{"Kim, S."});
  }
  SUBCASE("the last heading wins") {
    RefListDraw d{RefMarker::Bracket};
    d.earlier_heading = true;
    const auto entries = parse_reference_list(reflist_doc(d, three));
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].raw == three[0]);
  }
  SUBCASE("numbered heading") {
    RefListDraw d{RefMarker::Bracket};
    d.heading = "7 REFERENCES";
    CHECK(parse_reference_list(reflist_doc(d, three)).size() == 3);
  }
  SUBCASE("no heading") {
    RefListDraw d{RefMarker::Bracket};
    d.heading = "";
    CHECK(error_of([&] { parse_reference_list(reflist_doc(d, three)); }) == Errc::NoReferenceSection);
  }
  SUBCASE("a list that spans pages") {
    std::vector<std::string> many;
    for (int i = 0; i < 60; ++i) many.push_back("A. Author" + std::to_string(i) + ", \"Title number " + std::to_string(i) + ",\" 2001.");
    const auto entries = parse_reference_list(reflist_doc({RefMarker::Bracket}, many));
    REQUIRE(entries.size() == 60);
    CHECK(entries[59].key == std::optional<CitationKey>(NumericKey{60}));
    CHECK(entries[59].raw == many[59]);
  }
}

TEST_CASE("link_key") {
  std::vector<BibEntry> numbered;
  for (int n = 1; n <= 3; ++n) numbered.push_back(entry({"Doe, J."}, 2000 + n, NumericKey{n}));
  CHECK(link_key(NumericKey{2}, numbered) == numbered[1]);
  CHECK_FALSE(link_key(NumericKey{4}, numbered).has_value());

  const std::vector<BibEntry> one = {entry({"Smith, J."}, 2010), entry({"Jones, K.", "Smith, A."}, 2010)};
  CHECK(link_key(AuthorYearKey{"smith", 2010, std::nullopt}, one) == one[0]);
  CHECK_FALSE(link_key(AuthorYearKey{"smith", 2011, std::nullopt}, one).has_value());

  const std::vector<BibEntry> two = {entry({"Smith, J."}, 2010), entry({"A. Smith"}, 2010)};
  CHECK_FALSE(link_key(AuthorYearKey{"smith", 2010, std::nullopt}, two).has_value());
  CHECK(link_key(AuthorYearKey{"smith", 2010, 'a'}, two) == two[0]);
  CHECK(link_key(AuthorYearKey{"smith", 2010, 'b'}, two) == two[1]);
  CHECK_FALSE(link_key(AuthorYearKey{"smith", 2010, 'c'}, two).has_value());
  CHECK(link_key(GeneratedKey{"smith", 2010}, one) == one[0]);
}

TEST_CASE("numeric links succeed iff exactly one entry carries the marker") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<BibEntry> entries;
    const int count = static_cast<int>(rng() % 8);
    for (int i = 0; i < count; ++i) {
      std::optional<CitationKey> key;
      if (rng() % 5) key = NumericKey{1 + static_cast<int>(rng() % 6)};
      entries.push_back(entry({"Doe, J."}, 2000 + i, key));
    }
    const int n = 1 + static_cast<int>(rng() % 6);
    int carriers = 0;
    for (const auto& e : entries) carriers += e.key == std::optional<CitationKey>(NumericKey{n});
    const auto hit = link_key(NumericKey{n}, entries);
    CHECK(hit.has_value() == (carriers == 1));
    if (hit) CHECK(hit->key == std::optional<CitationKey>(NumericKey{n}));
  }
}

TEST_CASE("linking corpus: full recall of the linkable set, no wrong links") {
  const json corpus = load_json("linking_corpus.json");
  int total = 0, unlinkable = 0;
  for (const auto& [name, part] : corpus.items()) {
    CAPTURE(name);
    const auto raws = part["entries"].get<std::vector<std::string>>();
    const RefListDraw draw{name == "numeric" ? RefMarker::Bracket : RefMarker::Hanging};
    const auto entries = parse_reference_list(reflist_doc(draw, raws));
    REQUIRE(entries.size() == raws.size());
    std::vector<std::string> cells;
    for (const auto& k : part["keys"]) cells.push_back(k["cell"]);
    const auto links = link_rows(keyed_table(cells), entries);
    REQUIRE(links.size() == cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      CAPTURE(cells[i]);
      const auto& target = part["keys"][i]["target"];
      ++total;
      if (target.is_null()) {
        ++unlinkable;
        CHECK_FALSE(links[i].linked());
        continue;
      }
      REQUIRE(links[i].linked());
      // numeric targets are markers, author-year targets are list positions
      const std::size_t pos = name == "numeric" ? target.get<std::size_t>() - 1 : target.get<std::size_t>();
      CHECK(links[i].entry->raw == raws[pos]);
    }
  }
  CHECK(total == 40);
  CHECK(unlinkable == 5);
}

TEST_CASE("append_metadata_columns") {
  const auto table = keyed_table({"[1]", "[2]"});
  BibEntry a = entry({"Doe, J.", "Roe, A."}, 2018, NumericKey{1});
  a.title = "A Study of Fixtures";
  a.month = 3;
  a.doi = "10.5555/fixture.a";
  BibEntry b = entry({"Smith, A."}, 2010, NumericKey{2});
  const auto links = link_rows(table, {a, b});
  const auto out = append_metadata_columns(table, links);
  REQUIRE(out.n_cols() == table.n_cols() + 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(out.columns[table.n_cols() + i].label == kMetadataLabels[i]);
    CHECK(out.columns[table.n_cols() + i].role == format::Role::Metadata);
  }
  CHECK(out.rows[0] == format::Row{"[1]", "m0", "A Study of Fixtures", "Doe, J.; Roe, A.", "3", "2018", "10.5555/fixture.a"});
  CHECK(out.rows[1] == format::Row{"[2]", "m1", "", "Smith, A.", "", "2010", ""});
  CHECK(format::validate(out).empty());

  try {
    append_metadata_columns(table, link_rows(table, {a}));
    FAIL("expected UnresolvedRows");
  } catch (const UnresolvedRowsError& e) {
    CHECK(e.code() == Errc::UnresolvedRows);
    CHECK(e.rows() == std::vector<std::size_t>{1});
  }
  CHECK(error_of([&] { append_metadata_columns(table, {links[0]}); }) == Errc::LinkCoverageMismatch);
  CHECK(error_of([&] { append_metadata_columns(table, {links[0], links[0]}); }) == Errc::LinkCoverageMismatch);
}

TEST_CASE("append_metadata_columns adds five columns and keeps every cell") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<std::string> keys;
    std::vector<BibEntry> entries;
    for (std::size_t i = 0; i < n; ++i) {
      keys.push_back("[" + std::to_string(i + 1) + "]");
      BibEntry e = entry({"Doe, J."}, 1990 + static_cast<int>(rng() % 30), NumericKey{static_cast<int>(i) + 1});
      if (rng() % 2) e.title = "Title " + std::to_string(i);
      if (rng() % 2) e.month = 1 + static_cast<int>(rng() % 12);
      entries.push_back(e);
    }
    const auto table = keyed_table(keys);
    const auto out = append_metadata_columns(table, link_rows(table, entries));
    REQUIRE(out.n_cols() == table.n_cols() + 5);
    REQUIRE(out.n_rows() == table.n_rows());
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < table.n_cols(); ++c) CHECK(out.rows[r][c] == table.rows[r][c]);
    }
  }
}

TEST_CASE("title similarity") {
  CHECK(title_similarity("A Study of Fixtures", "a study of fixtures") == doctest::Approx(1.0));
  CHECK(title_similarity("A Study of Fixtures", "A study of fixtures.") == doctest::Approx(1.0));
  CHECK(title_similarity("abc", "xyz") == doctest::Approx(0.0));
  CHECK(title_similarity("Creating a scholarly knowledge graph from survey article tables",
                         "Creating a Scholarly Knowledge Graph from Survey Article Tables") >= kTitleSimilarityThreshold);
  CHECK(title_similarity("Open research knowledge graph", "Closed research knowledge bases") < kTitleSimilarityThreshold);
}

TEST_CASE("mock metadata records") {
  auto client = MockMetadataClient::from_file(std::string(SURVEYKG_TEST_DATA) + "/metadata_records.tsv");
  REQUIRE(client.records().size() == 5);
  CHECK(client.records()[0] ==
        MetadataRecord{"10.5555/fixture.a", "A Study of Fixtures", {"Doe, Jane", "Roe, Alan"}, 2018, 3});
  CHECK_FALSE(client.records()[4].month.has_value());
  CHECK(client.by_doi("10.5555/FIXTURE.A").has_value());
  CHECK_FALSE(client.by_doi("10.5555/none").has_value());
  CHECK(client.query_count() == 2);
  CHECK(error_of([] { MockMetadataClient::parse_records("only-one-field\n"); }) == Errc::IoError);
  CHECK(error_of([] { MockMetadataClient::from_file("/nonexistent/records.tsv"); }) == Errc::IoError);
}

TEST_CASE("lookup_metadata") {
  auto client = MockMetadataClient::from_file(std::string(SURVEYKG_TEST_DATA) + "/metadata_records.tsv");

  SUBCASE("by DOI fills absent fields") {
    BibEntry e;
    e.raw = "see 10.5555/fixture.a";
    e.doi = "10.5555/fixture.a";
    const auto out = lookup_metadata(e, client);
    CHECK(out.status == LookupStatus::Completed);
    CHECK(out.entry.title == std::optional<std::string>("A Study of Fixtures"));
    CHECK(out.entry.authors == std::vector<std::string>{"Doe, Jane", "Roe, Alan"});
    CHECK(out.entry.year == std::optional<int>(2018));
    CHECK(out.entry.month == std::optional<int>(3));
    CHECK(out.entry.raw == e.raw);
  }
  SUBCASE("by title above the threshold") {
    BibEntry e = parse_citation_string(
        "Oelen, A., Stocker, M., & Auer, S. (2020a). Creating a scholarly knowledge graph from survey article tables. "
        "In Proceedings of ICADL, 373–389.");
    const auto out = lookup_metadata(e, client);
    CHECK(out.status == LookupStatus::Completed);
    CHECK(out.entry.doi == std::optional<std::string>("10.1007/978-3-030-64452-9_35"));
    CHECK(out.entry.month == std::optional<int>(11));
    CHECK(out.entry.authors == e.authors);
    CHECK(out.entry.title == e.title);
  }
  SUBCASE("complete entries are not queried") {
    BibEntry e = entry({"Doe, J."}, 2018);
    e.title = "T";
    e.month = 1;
    e.doi = "10.1/x";
    const int before = client.query_count();
    const auto out = lookup_metadata(e, client);
    CHECK(out.status == LookupStatus::AlreadyComplete);
    CHECK(out.entry == e);
    CHECK(client.query_count() == before);
  }
  SUBCASE("no match leaves the entry unchanged") {
    BibEntry e = entry({}, std::nullopt);
    e.title = "Completely unrelated words here";
    const auto out = lookup_metadata(e, client);
    CHECK(out.status == LookupStatus::NoMatch);
    CHECK(out.entry == e);
  }
  SUBCASE("service unavailable") {
    client.set_unavailable(true);
    BibEntry e = entry({}, std::nullopt);
    e.doi = "10.5555/fixture.a";
    CHECK(error_of([&] { lookup_metadata(e, client); }) == Errc::ServiceUnavailable);
  }
}

TEST_CASE("lookup_metadata never overwrites present fields") {
  auto client = MockMetadataClient::from_file(std::string(SURVEYKG_TEST_DATA) + "/metadata_records.tsv");
  std::mt19937 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const auto& rec = client.records()[rng() % client.records().size()];
    BibEntry e;
    e.raw = "r";
    if (rng() % 2) e.doi = rec.doi;
    if (!e.doi || rng() % 2) e.title = rng() % 2 ? rec.title : "Other title " + std::to_string(trial);
    if (rng() % 2) e.authors = {"Someone, S."};
    if (rng() % 2) e.year = 1999;
    if (rng() % 2) e.month = 12;
    const auto out = lookup_metadata(e, client).entry;
    if (e.title) CHECK(out.title == e.title);
    if (!e.authors.empty()) CHECK(out.authors == e.authors);
    if (e.year) CHECK(out.year == e.year);
    if (e.month) CHECK(out.month == e.month);
    if (e.doi) CHECK(out.doi == e.doi);
    CHECK(out.raw == e.raw);
  }
}

TEST_CASE("Crossref client against a local server") {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Get(R"(/api/works/(.+))", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    if (req.matches[1] != "10.5555%2Ffixture.a" && req.matches[1] != "10.5555/fixture.a") {
      res.status = 404;
      return;
    }
    res.set_content(R"({"status":"ok","message":{"DOI":"10.5555/fixture.a","title":["A Study of Fixtures"],
      "author":[{"given":"Jane","family":"Doe"},{"name":"Fixture Consortium"}],
      "issued":{"date-parts":[[2018,3,1]]}}})",
                    "application/json");
  });
  server.Get("/api/works", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    CHECK(req.get_param_value("query.bibliographic") == "A Study of Fixtures");
    CHECK(req.get_param_value("rows") == "5");
    res.set_content(R"({"status":"ok","message":{"items":[{"DOI":"10.5555/fixture.a","title":["A Study of Fixtures"],
      "issued":{"date-parts":[[2018]]}}]}})",
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  CrossrefClient client("http://127.0.0.1:" + std::to_string(port) + "/api/", std::chrono::milliseconds(150));
  const auto start = std::chrono::steady_clock::now();
  const auto rec = client.by_doi("10.5555/fixture.a");
  REQUIRE(rec.has_value());
  CHECK(rec->title == "A Study of Fixtures");
  CHECK(rec->authors == std::vector<std::string>{"Doe, Jane", "Fixture Consortium"});
  CHECK(rec->year == std::optional<int>(2018));
  CHECK(rec->month == std::optional<int>(3));
  CHECK_FALSE(client.by_doi("10.5555/missing").has_value());
  const auto found = client.search_title("A Study of Fixtures", 5);
  REQUIRE(found.size() == 1);
  CHECK_FALSE(found[0].month.has_value());
  // three requests spaced by at least the minimum interval
  CHECK(std::chrono::steady_clock::now() - start >= std::chrono::milliseconds(300));
  CHECK(hits == 3);

  BibEntry e;
  e.raw = "r";
  e.doi = "10.5555/fixture.a";
  CHECK(lookup_metadata(e, client).entry.title == std::optional<std::string>("A Study of Fixtures"));

  server.stop();
  thread.join();
  CrossrefClient down("http://127.0.0.1:" + std::to_string(port), std::chrono::milliseconds(0));
  CHECK(error_of([&] { down.by_doi("10.5555/fixture.a"); }) == Errc::ServiceUnavailable);
}
