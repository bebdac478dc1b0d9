// cchain: command-line front end.
//
//   cchain kbtool build|validate|report ...
//   cchain diagnose --kb kb.json --anomaly id (--script s.json | --interactive)
//   cchain evaluate --kb kb.json --records dir [--report-out f] [--errorbar-out f]
//   cchain serve --kb kb.json [--port n] [--store-dir d] [--static-dir d]
//
// Exit status: 0 success, 1 domain error, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cchain/authoring.hpp"
#include "cchain/engine.hpp"
#include "cchain/eval.hpp"
#include "cchain/http_server.hpp"
#include "cchain/kb_json.hpp"

namespace fs = std::filesystem;
using namespace cchain;

namespace {

// `anomaly=path` or plain `path` (anomaly id taken from the file stem).
QuestionnaireSheet load_questionnaire(const std::string& arg) {
  std::string anomaly, path = arg;
  if (auto eq = arg.find('='); eq != std::string::npos) {
    anomaly = arg.substr(0, eq);
    path = arg.substr(eq + 1);
  } else {
    anomaly = fs::path(arg).stem().string();
  }
  return parse_questionnaire_csv(read_text_file(path), anomaly);
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

void print_discrepancies(const CutoffTable& table) {
  for (const auto& d : table.discrepancies) {
    std::cerr << "note: " << d.anomaly_id << " " << to_string(d.kind) << " averages to " << format_fixed6(d.computed)
              << " but the reference value is " << format_fixed6(d.reference) << "\n";
  }
}

ProfileAnswer read_profile_answer(const ProfileQuestion& q, const std::string& line) {
  if (q.kind == AnswerKind::categorical) return line;
  try {
    std::size_t used = 0;
    double v = std::stod(line, &used);
    if (used == line.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::type_mismatch, "\"" + q.id + "\" takes a number", q.id);
}

int run_interactive(std::shared_ptr<const KnowledgeBase> kb, const std::string& anomaly) {
  Session session(std::move(kb), anomaly);
  std::cout << "Answer each question; certainty answers are 0-100. Type 'undo' or 'stop' at any time.\n";
  std::string line;
  for (;;) {
    auto q = session.next_question();
    if (std::holds_alternative<Done>(q)) break;
    if (const auto* p = std::get_if<ProfilePrompt>(&q)) {
      std::cout << p->question->prompt;
      if (p->question->kind == AnswerKind::categorical) {
        std::cout << " [";
        for (std::size_t i = 0; i < p->question->allowed_values.size(); ++i) {
          std::cout << (i ? "/" : "") << p->question->allowed_values[i];
        }
        std::cout << "]";
      } else if (!p->question->unit.empty()) {
        std::cout << " (" << p->question->unit << ")";
      }
    } else {
      std::cout << std::get<SymptomPrompt>(q).symptom->prompt << " (0-100)";
    }
    std::cout << "\n> " << std::flush;
    if (!std::getline(std::cin, line) || line == "stop") break;
    try {
      if (line == "undo") {
        session.undo();
        continue;
      }
      const auto id = question_id(q);
      if (const auto* p = std::get_if<ProfilePrompt>(&q)) {
        session.submit_answer(id, read_profile_answer(*p->question, line));
      } else {
        session.submit_certainty(id, std::stod(line));
      }
      if (auto degree = session.certainty_degree()) {
        std::cout << "  certainty degree so far: " << display_percent(*degree) << "%\n";
      }
    } catch (const Error& e) {
      std::cout << "  " << e.what() << "\n";
    } catch (const std::exception&) {
      std::cout << "  please enter a number between 0 and 100\n";
    }
  }
  auto d = session.finalize({.early = true, .accept_no_evidence = true});
  std::cout << d.display() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cchain: certainty-chaining expert system shell"};
  app.require_subcommand(1);

  // kbtool
  auto* kbtool = app.add_subcommand("kbtool", "Author and check knowledge bases");
  kbtool->require_subcommand(1);

  std::vector<std::string> questionnaires;
  std::string cutoffs_path, scaffold_path, out_path;
  auto* build = kbtool->add_subcommand("build", "Build a knowledge base from questionnaire sheets");
  build->add_option("--questionnaire", questionnaires, "Questionnaire CSV, as [anomaly=]path; repeatable")->required();
  build->add_option("--cutoffs", cutoffs_path, "Expert cut-off CSV")->required();
  build->add_option("--scaffold", scaffold_path, "Scaffold JSON (names, profile questions, facts, extra rules)");
  build->add_option("--out", out_path, "Output knowledge-base file")->required();

  std::string kb_path;
  auto* validate = kbtool->add_subcommand("validate", "Parse and validate a knowledge base");
  validate->add_option("--kb", kb_path, "Knowledge-base file")->required();

  std::string report_questionnaire, probability_out, effects_out, report_cutoffs, cutoffs_out;
  auto* report = kbtool->add_subcommand("report", "Probability, certainty-effect and cut-off tables as CSV");
  report->add_option("--questionnaire", report_questionnaire, "Questionnaire CSV, as [anomaly=]path");
  report->add_option("--probability-out", probability_out, "Probability table output (default stdout)");
  report->add_option("--effects-out", effects_out, "Certainty-effect table output (default stdout)");
  report->add_option("--cutoffs", report_cutoffs, "Expert cut-off CSV");
  report->add_option("--cutoffs-out", cutoffs_out, "Cut-off table output (default stdout)");

  // diagnose
  std::string anomaly, script_path;
  bool interactive = false;
  auto* diagnose = app.add_subcommand("diagnose", "Run one diagnosis session");
  diagnose->add_option("--kb", kb_path, "Knowledge-base file")->required();
  diagnose->add_option("--anomaly", anomaly, "Anomaly to diagnose")->required();
  auto* script_opt = diagnose->add_option("--script", script_path, "Answer script JSON");
  auto* interactive_opt = diagnose->add_flag("--interactive", interactive, "Ask on the terminal");
  script_opt->excludes(interactive_opt);

  // evaluate
  std::string records_dir, report_out, errorbar_out;
  auto* evaluate = app.add_subcommand("evaluate", "Replay a record set and summarise per anomaly");
  evaluate->add_option("--kb", kb_path, "Knowledge-base file")->required();
  evaluate->add_option("--records", records_dir, "Record-set directory with manifest.csv")->required();
  evaluate->add_option("--report-out", report_out, "Summary report CSV (default stdout)");
  evaluate->add_option("--errorbar-out", errorbar_out, "Error-bar data CSV");

  // serve
  int port = 8080;
  std::string store_dir, static_dir, host = "127.0.0.1";
  auto* serve = app.add_subcommand("serve", "Serve the session API over HTTP");
  serve->add_option("--kb", kb_path, "Knowledge-base file")->required();
  serve->add_option("--port", port, "Port")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--store-dir", store_dir, "Session log directory (default $CCHAIN_STORE_DIR or ./sessions)");
  serve->add_option("--static-dir", static_dir, "Directory of static UI assets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*build) {
      std::vector<QuestionnaireSheet> sheets;
      for (const auto& q : questionnaires) sheets.push_back(load_questionnaire(q));
      auto table = aggregate_cutoffs(parse_cutoff_csv(read_text_file(cutoffs_path)));
      print_discrepancies(table);
      Scaffold scaffold;
      if (!scaffold_path.empty()) scaffold = parse_scaffold(read_text_file(scaffold_path));
      auto kb = build_kb(sheets, table, scaffold);
      write_text_file(out_path, serialize_kb(kb));
      std::cout << "wrote " << out_path << ": " << kb.anomalies().size() << " anomalies, " << kb.symptoms().size()
                << " symptoms, " << kb.rules().size() << " rules\n";
      return 0;
    }
    if (*validate) {
      auto kb = load_kb(kb_path);
      std::cout << "ok: " << kb->anomalies().size() << " anomalies, " << kb->symptoms().size() << " symptoms, "
                << kb->rules().size() << " rules\n";
      return 0;
    }
    if (*report) {
      if (report_questionnaire.empty() && report_cutoffs.empty()) {
        std::cerr << "kbtool report needs --questionnaire and/or --cutoffs\n";
        return 2;
      }
      if (!report_questionnaire.empty()) {
        auto averaged = average_expert_cfs(load_questionnaire(report_questionnaire));
        write_or_print(probability_out, probability_report_csv(probability_table(averaged)));
        if (probability_out.empty() && effects_out.empty()) std::cout << "\n";
        write_or_print(effects_out, effect_report_csv(certainty_effect_table(averaged)));
      }
      if (!report_cutoffs.empty()) {
        auto table = aggregate_cutoffs(parse_cutoff_csv(read_text_file(report_cutoffs)));
        write_or_print(cutoffs_out, cutoff_report_csv(table));
      }
      return 0;
    }
    if (*diagnose) {
      auto kb = load_kb(kb_path);
      if (interactive) return run_interactive(kb, anomaly);
      if (script_path.empty()) {
        std::cerr << "diagnose needs --script or --interactive\n";
        return 2;
      }
      auto d = replay(kb, anomaly, parse_answer_script(read_text_file(script_path)));
      std::cout << d.display() << "\n";
      return 0;
    }
    if (*evaluate) {
      auto kb = load_kb(kb_path);
      auto set = load_record_set(records_dir);
      auto results = run_batch(kb, set);
      for (const auto& r : results) {
        if (!r.error.empty()) std::cerr << "record " << r.record_id << ": " << r.error << "\n";
      }
      auto groups = summarize_by_anomaly(*kb, results);
      write_or_print(report_out, emit_report(groups));
      if (!errorbar_out.empty()) write_text_file(errorbar_out, emit_errorbar_data(groups));
      return 0;
    }
    if (*serve) {
      auto kb = load_kb(kb_path);
      if (store_dir.empty()) {
        const char* env = std::getenv("CCHAIN_STORE_DIR");
        store_dir = env && *env ? env : "sessions";
      }
      SessionService service(kb, SessionStore(store_dir));
      httplib::Server server;
      mount_session_api(server, service);
      if (!static_dir.empty() && !server.set_mount_point("/", static_dir)) {
        throw Error(ErrorKind::io, "static directory not found: " + static_dir, static_dir);
      }
      std::cout << "serving on http://" << host << ":" << port << " (store: " << store_dir << ")\n" << std::flush;
      if (!server.listen(host, port)) throw Error(ErrorKind::io, "cannot listen on port " + std::to_string(port));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
