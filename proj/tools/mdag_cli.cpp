// mdag: decompose callback graphs, generate workloads, simulate schedules and
// run acceptance-ratio campaigns.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "mdag/mdag.hpp"

namespace {

using mdag::json_io::Json;

mdag::WorkloadTemplate load_template(const std::string& path) {
  if (path.empty()) return mdag::default_template();
  return mdag::json_io::template_from_json(mdag::json_io::read_json_file(path));
}

mdag::LoadRange parse_load(const std::string& lambda) {
  auto colon = lambda.find(':');
  if (colon == std::string::npos) {
    auto v = mdag::parse_rational(lambda);
    return {v, v};
  }
  return {mdag::parse_rational(lambda.substr(0, colon)), mdag::parse_rational(lambda.substr(colon + 1))};
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    mdag::json_io::write_text_file(path, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-deadline DAG scheduling toolkit"};
  app.require_subcommand(1);

  // decompose
  std::string graph_path, beta_text = "1.2", out_path;
  auto* decompose = app.add_subcommand("decompose", "Split a callback graph at queue edges into DAG tasks");
  decompose->add_option("--graph", graph_path, "Callback graph JSON")->required();
  decompose->add_option("--beta", beta_text, "Deadline factor over the WCET critical path")->capture_default_str();
  decompose->add_option("--out", out_path, "Task set JSON output (stdout if omitted)");

  // generate
  std::string template_path, lambda_text = "0.1:1";
  std::uint64_t seed = 1;
  auto* generate = app.add_subcommand("generate", "Draw one workload (task set with exec_us) from a template");
  generate->add_option("--template", template_path, "Workload template JSON (shipped template if omitted)");
  generate->add_option("--seed", seed)->capture_default_str();
  generate->add_option("--beta", beta_text)->capture_default_str();
  generate->add_option("--lambda", lambda_text, "Load factor, fixed 'x' or range 'lo:hi'")->capture_default_str();
  generate->add_option("--out", out_path, "Task set JSON output (stdout if omitted)");

  // simulate
  std::string taskset_path, duration_text = "3000ms", policy_text = "gedf_rad", mode_text = "non_preemptive";
  std::string trace_path, sim_lambda = "1";
  int cores = 7;
  auto* simulate = app.add_subcommand("simulate", "Simulate one task set and print the result as JSON");
  simulate->add_option("--taskset", taskset_path, "Task set JSON (shipped template if omitted)");
  simulate->add_option("--cores", cores)->capture_default_str();
  simulate->add_option("--duration", duration_text, "Simulated time, e.g. 3000ms or 250us")->capture_default_str();
  simulate->add_option("--policy", policy_text, "gedf_rad | wc_fifo | rm")->capture_default_str();
  simulate->add_option("--mode", mode_text, "non_preemptive | preemptive")->capture_default_str();
  simulate->add_option("--seed", seed, "Seed for exec-time sampling when the task set has no exec_us")
      ->capture_default_str();
  simulate->add_option("--lambda", sim_lambda, "Load factor applied when sampling")->capture_default_str();
  simulate->add_option("--beta", beta_text, "Deadline factor when the shipped template is used")->capture_default_str();
  simulate->add_option("--trace", trace_path, "Write a JSON-lines schedule trace here");

  // experiment
  std::string config_path, out_dir;
  unsigned jobs = 1;
  auto* experiment = app.add_subcommand("experiment", "Run an acceptance-ratio campaign and write CSVs");
  experiment->add_option("--config", config_path, "Campaign config JSON (defaults if omitted)");
  experiment->add_option("--out", out_dir, "Output directory")->required();
  experiment->add_option("--jobs", jobs, "Parallel workers")->capture_default_str();
  experiment->add_option("--template", template_path, "Workload template JSON (shipped template if omitted)");

  // export-template
  auto* export_template = app.add_subcommand("export-template", "Write the shipped workload template JSON");
  export_template->add_option("--out", out_path, "Output path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*decompose) {
      // A template file is a graph plus an optional sampler block.
      auto graph = mdag::json_io::template_from_json(mdag::json_io::read_json_file(graph_path)).graph;
      auto ts = mdag::decompose(graph, mdag::parse_rational(beta_text));
      write_or_print(out_path, mdag::json_io::to_json(ts).dump(2) + "\n");
    } else if (*generate) {
      auto tmpl = load_template(template_path);
      auto w = mdag::generate(tmpl, mdag::GenConfig{seed, mdag::parse_rational(beta_text), parse_load(lambda_text)});
      write_or_print(out_path, mdag::json_io::to_json(w.taskset, &w.exec).dump(2) + "\n");
    } else if (*simulate) {
      mdag::TaskSet ts;
      std::optional<mdag::ExecAssignment> exec;
      if (taskset_path.empty()) {
        ts = mdag::decompose(mdag::default_callback_graph(), mdag::parse_rational(beta_text));
      } else {
        auto doc = mdag::json_io::taskset_document_from_json(mdag::json_io::read_json_file(taskset_path));
        ts = std::move(doc.taskset);
        exec = std::move(doc.exec);
      }
      if (!exec) {
        std::mt19937_64 rng(seed);
        exec = mdag::sample_exec(ts, mdag::default_sampler(ts), parse_load(sim_lambda), rng);
      }
      mdag::SimConfig cfg{cores, mdag::parse_time(duration_text), mdag::parse_policy(policy_text),
                          mdag::parse_mode(mode_text), !trace_path.empty()};
      auto result = mdag::run(ts, cfg, *exec);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      if (!trace_path.empty()) mdag::json_io::write_text_file(trace_path, mdag::json_io::trace_jsonl(result.trace));
      std::cout << mdag::json_io::to_json(result, cfg).dump(2) << "\n";
    } else if (*experiment) {
      mdag::CampaignConfig cfg;
      if (!config_path.empty()) cfg = mdag::json_io::campaign_config_from_json(mdag::json_io::read_json_file(config_path));
      auto summary = mdag::run_campaign(cfg, load_template(template_path), jobs);
      mdag::write_csv(summary, out_dir);
    } else if (*export_template) {
      write_or_print(out_path, mdag::json_io::to_json(mdag::default_template()).dump(2) + "\n");
    }
  } catch (const mdag::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const mdag::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
