#include "surveykg/cli.hpp"

#include <csignal>
#include <fstream>
#include <istream>
#include <ostream>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "surveykg/layout/layout.hpp"
#include "surveykg/pipeline/pipeline.hpp"
#include "surveykg/service/service.hpp"

namespace surveykg {

namespace {

namespace fs = std::filesystem;

constexpr int kExitItemFailure = 1;
constexpr int kExitUsage = 2;

void print_error(std::ostream& err, std::string_view item, Errc code, std::string_view message) {
  err << "error\t" << item << "\t" << errc_name(code) << "\t" << message << "\n";
}

int report(std::ostream& out, std::ostream& err, std::string_view stage, const pipeline::StageReport& r) {
  for (const auto& e : r.errors) print_error(err, e.item, e.code, e.message);
  out << stage << "\tprocessed " << r.processed << "\tskipped " << r.skipped;
  if (r.prompts) out << "\tprompts " << r.prompts;
  out << "\terrors " << r.errors.size() << "\n";
  return r.errors.empty() ? 0 : kExitItemFailure;
}

void write_output(const std::string& path, std::string_view data, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << data;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << data;
  if (!f) throw Error(Errc::IoError, "cannot write " + path);
}

httplib::Server* g_server = nullptr;

extern "C" void stop_server(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err,
            bool interactive) {
  CLI::App app{"Import survey tables from PDF articles into a knowledge graph.", "surveykg"};
  app.require_subcommand(1);

  std::string workspace = ".";
  bool fail_fast = false;
  bool force = false;
  std::string records;
  app.add_option("-w,--workspace", workspace, "Workspace directory")->capture_default_str();
  app.add_flag("--fail-fast", fail_fast, "Stop at the first item failure");
  app.add_flag("--force", force, "Redo items whose artifacts already exist");
  app.add_option("--metadata-records", records,
                 "Offline metadata record file (overrides SURVEYKG_METADATA_RECORDS)")
      ->check(CLI::ExistingFile);

  auto* extract = app.add_subcommand("extract", "Extract tables to CSV (workspace, or one PDF with --pdf)");
  std::string pdf;
  std::vector<std::string> regions;
  std::string mode = "lattice";
  std::string out_path;
  extract->add_option("--pdf", pdf, "Single PDF to extract from")->check(CLI::ExistingFile);
  extract->add_option("--region", regions, "Region page:x0,y0,x1,y1; repeat for a multi-page table");
  extract->add_option("--mode", mode, "lattice or stream")
      ->check(CLI::IsMember({"lattice", "stream"}, CLI::ignore_case))
      ->capture_default_str();
  extract->add_option("--out", out_path, "Output CSV for --pdf (default: stdout)");

  auto* format = app.add_subcommand("format", "Apply edit scripts and validate extracted tables");

  auto* refs = app.add_subcommand("refs", "Link reference cells to the article's reference list");
  std::string resolutions;
  bool prompt = false;
  refs->add_option("--resolutions", resolutions, "Manual citations, one '<table>\\t<row>\\t<citation>' per line");
  refs->add_flag("--interactive", prompt, "Prompt for citations that could not be linked");

  auto* build = app.add_subcommand("build", "Rebuild the graph from settings and linked tables");
  std::string settings;
  build->add_option("--settings", settings, "Settings file (default: <workspace>/settings.json)")
      ->check(CLI::ExistingFile);

  auto* stats = app.add_subcommand("stats", "Report counts for every stage");
  bool stats_json = false;
  stats->add_flag("--json", stats_json, "Print JSON instead of tab-separated lines");

  auto* exp = app.add_subcommand("export", "Export the graph");
  std::string export_format = "nt";
  std::string export_out;
  exp->add_option("--format", export_format, "nt or json")->check(CLI::IsMember({"nt", "json"}))->capture_default_str();
  exp->add_option("--out", export_out, "Output file (default: stdout)");

  auto* lay = app.add_subcommand("layout", "Print glyphs and rulings of a PDF");
  std::string layout_pdf;
  int layout_page = -1;
  lay->add_option("--pdf", layout_pdf, "PDF file")->required()->check(CLI::ExistingFile);
  lay->add_option("--page", layout_page, "Only this 0-based page")->check(CLI::NonNegativeNumber);

  auto* serve = app.add_subcommand("serve", "Serve the import-session HTTP API under /api/v1");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string store;
  std::string cors = "*";
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port, "0 picks a free port")->check(CLI::Range(0, 65535))->capture_default_str();
  serve->add_option("--store", store, "Graph store file (default: in memory)");
  serve->add_option("--records", records, "Offline metadata records, also served under /api/v1/metadata")
      ->check(CLI::ExistingFile);
  serve->add_option("--cors-origin", cors, "Allowed browser origin")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    std::unique_ptr<refs::MetadataClient> client;
    if (!records.empty()) {
      client = std::make_unique<refs::MockMetadataClient>(refs::MockMetadataClient::from_file(records));
    } else {
      client = pipeline::metadata_client_from_env();
    }

    pipeline::RunOptions options;
    options.fail_fast = fail_fast;
    options.force = force;
    options.metadata = client.get();
    const pipeline::Workspace ws{fs::path(workspace)};

    if (*extract) {
      if (pdf.empty()) {
        if (!regions.empty()) {
          err << "--region needs --pdf\n";
          return kExitUsage;
        }
        return report(out, err, "extract", ws.extract(options));
      }
      if (regions.empty()) {
        err << "--pdf needs at least one --region\n";
        return kExitUsage;
      }
      try {
        std::vector<layout::Region> parsed;
        for (const auto& r : regions) parsed.push_back(layout::parse_region(r));
        const auto doc = layout::load_document(pdf);
        const auto grid = pipeline::extract_regions(doc, parsed, extract::parse_method(mode));
        for (const auto& i : extract::diagnose(grid)) {
          err << "issue\t" << extract::issue_kind_name(i.kind) << "\t" << i.row << "\t" << i.column << "\t" << i.note
              << "\n";
        }
        write_output(out_path, extract::grid_to_csv(grid), out);
        return 0;
      } catch (const Error& e) {
        print_error(err, pdf, e.code(), e.what());
        return kExitItemFailure;
      }
    }
    if (*format) return report(out, err, "format", ws.format(options));
    if (*refs) {
      if (!resolutions.empty()) options.resolutions = fs::path(resolutions);
      if (prompt || interactive) {
        options.prompt_in = &in;
        options.prompt_out = &err;
      }
      return report(out, err, "refs", ws.refs(options));
    }
    if (*build) {
      if (!settings.empty()) options.settings = fs::path(settings);
      return report(out, err, "build", ws.build(options));
    }
    if (*stats) {
      const auto s = ws.stats();
      if (stats_json) {
        nlohmann::ordered_json j;
        j["evaluated"] = s.evaluated;
        j["extracted_tables"] = s.extracted_tables;
        j["extraction_parts"] = s.extraction_parts;
        j["linked_refs"] = s.linked_refs;
        j["unlinked_refs"] = s.unlinked_refs;
        j["papers"] = s.papers;
        j["comparisons"] = s.comparisons;
        j["cells_plain"] = s.cells_plain;
        j["cells_with_meta"] = s.cells_with_meta;
        out << j.dump(2) << "\n";
      } else {
        out << pipeline::render_stats(s);
      }
      return 0;
    }
    if (*exp) {
      write_output(export_out, ws.export_graph(export_format), out);
      return 0;
    }
    if (*lay) {
      layout::Document doc = layout::load_document(layout_pdf);
      if (layout_page >= 0) {
        if (static_cast<std::size_t>(layout_page) >= doc.page_count()) {
          throw Error(Errc::PageOutOfRange,
                      "page " + std::to_string(layout_page) + " of " + std::to_string(doc.page_count()));
        }
        doc.pages = {doc.pages[static_cast<std::size_t>(layout_page)]};
      }
      out << layout::dump_layout(doc);
      return 0;
    }
    if (*serve) {
      service::ServiceOptions so;
      if (!store.empty()) so.store_path = fs::path(store);
      so.metadata = client.get();
      if (!records.empty()) so.mock_records = refs::MockMetadataClient::from_file(records).records();
      so.cors_origin = cors;
      service::Service svc(std::move(so));
      httplib::Server server;
      svc.mount(server);
      const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
      if (bound < 0) throw Error(Errc::IoError, "cannot listen on " + host + ":" + std::to_string(port));
      out << "listening on http://" << host << ":" << bound << std::string(service::kBasePath) << "\n" << std::flush;
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      server.listen_after_bind();
      g_server = nullptr;
      return 0;
    }
  } catch (const Error& e) {
    print_error(err, workspace, e.code(), e.what());
    return e.code() == Errc::UsageError ? kExitUsage : kExitItemFailure;
  } catch (const fs::filesystem_error& e) {
    print_error(err, workspace, Errc::IoError, e.what());
    return kExitItemFailure;
  }
  return 0;
}

}  // namespace surveykg
