#pragma once

// Monte-Carlo acceptance-ratio campaigns. Run i uses seed base_seed + i to
// draw one workload, and every policy is simulated on that same workload.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "mdag/default_template.hpp"
#include "mdag/error.hpp"
#include "mdag/json_io.hpp"
#include "mdag/rational.hpp"
#include "mdag/simulator.hpp"
#include "mdag/workload.hpp"

namespace mdag {

/// Buckets with fewer runs than this are too noisy to compare.
inline constexpr std::int64_t kMinBucketRuns = 20;

struct CampaignConfig {
  std::int64_t n_runs = 5000;
  int cores = 7;
  Time duration = ms(3000);
  std::vector<PolicyId> policies{kAllPolicies.begin(), kAllPolicies.end()};
  Mode mode = Mode::NonPreemptive;
  Rational bucket_width{1, 20};
  std::uint64_t base_seed = 1;
  Rational beta{6, 5};
  LoadRange load{Rational(1, 10), Rational(1)};

  void validate() const {
    if (n_runs < 1) throw Error(ErrorKind::InvalidConfig, "n_runs must be at least 1");
    if (cores < 1) throw Error(ErrorKind::InvalidConfig, "cores must be at least 1");
    if (duration < 1) throw Error(ErrorKind::InvalidConfig, "duration must be at least 1us");
    if (policies.empty()) throw Error(ErrorKind::InvalidConfig, "at least one policy is required");
    if (bucket_width <= 0 || bucket_width > 1) throw Error(ErrorKind::InvalidConfig, "bucket width must be in (0, 1]");
    GenConfig{base_seed, beta, load}.validate();
  }
};

struct RunRecord {
  PolicyId policy = PolicyId::GedfRad;
  std::int64_t run_id = 0;
  std::uint64_t seed = 0;
  Rational norm_util;
  std::int64_t bucket = 0;  // multiples of the bucket width
  std::size_t misses = 0;
  bool passed = false;
  std::uint64_t workload_hash = 0;
};

struct BucketSummary {
  PolicyId policy = PolicyId::GedfRad;
  std::int64_t bucket = 0;
  std::int64_t runs = 0;
  std::int64_t passes = 0;

  Rational acceptance_ratio() const { return Rational(passes, runs); }
  bool low_n() const { return runs < kMinBucketRuns; }
};

struct CampaignSummary {
  Rational bucket_width;
  std::vector<RunRecord> runs;        // sorted by (policy name, bucket, run_id)
  std::vector<BucketSummary> buckets;  // sorted by (policy name, bucket); empty buckets absent

  Rational bucket_value(std::int64_t bucket) const { return bucket_width * bucket; }

  std::optional<BucketSummary> find(PolicyId policy, std::int64_t bucket) const {
    for (const auto& b : buckets) {
      if (b.policy == policy && b.bucket == bucket) return b;
    }
    return std::nullopt;
  }
};

/// Nearest multiple of the width, halves rounded up.
inline std::int64_t bucket_index(const Rational& norm_util, const Rational& width) {
  return to_time(round_half_up(norm_util / width));
}

/// FNV-1a over (vertex id, exec) pairs.
inline std::uint64_t hash_exec(const ExecAssignment& exec) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (const auto& [id, e] : exec) {
    mix(static_cast<std::uint64_t>(id));
    mix(static_cast<std::uint64_t>(e));
  }
  return h;
}

namespace detail {

inline std::vector<RunRecord> run_one(const CampaignConfig& cfg, const WorkloadTemplate& tmpl, std::int64_t i) {
  const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(i);
  Workload w = generate(tmpl, GenConfig{seed, cfg.beta, cfg.load});
  Rational util = realized_normalized_utilization(w.taskset, w.exec, cfg.cores);
  std::int64_t bucket = bucket_index(util, cfg.bucket_width);
  std::uint64_t hash = hash_exec(w.exec);
  std::vector<RunRecord> out;
  for (PolicyId p : cfg.policies) {
    SimResult r = run(w.taskset, SimConfig{cfg.cores, cfg.duration, p, cfg.mode, false}, w.exec);
    out.push_back({p, i, seed, util, bucket, r.miss_count, r.miss_count == 0, hash});
  }
  return out;
}

}  // namespace detail

/// `jobs` worker threads; the summary does not depend on it.
inline CampaignSummary run_campaign(const CampaignConfig& cfg, const WorkloadTemplate& tmpl, unsigned jobs = 1) {
  cfg.validate();
  jobs = std::max(1u, jobs);

  std::vector<std::vector<RunRecord>> per_run(static_cast<std::size_t>(cfg.n_runs));
  std::atomic<std::int64_t> next{0};
  std::mutex error_mutex;
  std::optional<std::int64_t> failed_run;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      std::int64_t i = next.fetch_add(1);
      if (i >= cfg.n_runs) return;
      try {
        per_run[static_cast<std::size_t>(i)] = detail::run_one(cfg, tmpl, i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!failed_run || i < *failed_run) {
          failed_run = i;
          failure = std::current_exception();
        }
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const Error& e) {
      throw Error(e.kind(), "run " + std::to_string(*failed_run) + ": " + e.what());
    }
  }

  CampaignSummary summary;
  summary.bucket_width = cfg.bucket_width;
  for (auto& recs : per_run) {
    for (auto& r : recs) summary.runs.push_back(std::move(r));
  }
  std::sort(summary.runs.begin(), summary.runs.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::make_tuple(to_string(a.policy), a.bucket, a.run_id) <
           std::make_tuple(to_string(b.policy), b.bucket, b.run_id);
  });
  for (const auto& r : summary.runs) {
    if (summary.buckets.empty() || summary.buckets.back().policy != r.policy ||
        summary.buckets.back().bucket != r.bucket) {
      summary.buckets.push_back({r.policy, r.bucket, 0, 0});
    }
    ++summary.buckets.back().runs;
    if (r.passed) ++summary.buckets.back().passes;
  }
  return summary;
}

inline std::string runs_csv(const CampaignSummary& s) {
  std::ostringstream out;
  out << "policy,run_id,seed,realized_norm_util,bucket,misses,passed\n";
  for (const auto& r : s.runs) {
    out << to_string(r.policy) << ',' << r.run_id << ',' << r.seed << ',' << to_fixed(r.norm_util, 6) << ','
        << to_fixed(s.bucket_value(r.bucket), 6) << ',' << r.misses << ',' << (r.passed ? "true" : "false") << '\n';
  }
  return out.str();
}

inline std::string summary_csv(const CampaignSummary& s) {
  std::ostringstream out;
  out << "policy,bucket,runs,passes,acceptance_ratio\n";
  for (const auto& b : s.buckets) {
    out << to_string(b.policy) << ',' << to_fixed(s.bucket_value(b.bucket), 6) << ',' << b.runs << ',' << b.passes
        << ',' << to_fixed(b.acceptance_ratio(), 6) << '\n';
  }
  return out.str();
}

/// Writes runs.csv and summary.csv, creating `dir` if needed.
inline void write_csv(const CampaignSummary& s, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  json_io::write_text_file(dir / "runs.csv", runs_csv(s));
  json_io::write_text_file(dir / "summary.csv", summary_csv(s));
}

namespace json_io {

/// Campaign config file; every field is optional and times carry `_us`.
inline CampaignConfig campaign_config_from_json(const Json& doc) {
  check_keys(doc, {},
             {"n_runs", "cores", "duration_us", "policies", "mode", "bucket_width", "base_seed", "beta",
              "lambda_lo", "lambda_hi"},
             "campaign config");
  CampaignConfig c;
  const std::string where = "campaign config";
  if (doc.contains("n_runs")) c.n_runs = get_int(doc, "n_runs", where);
  if (doc.contains("cores")) c.cores = static_cast<int>(get_int(doc, "cores", where));
  if (doc.contains("duration_us")) c.duration = get_int(doc, "duration_us", where);
  if (doc.contains("policies")) {
    c.policies.clear();
    for (const auto& p : get<std::vector<std::string>>(doc, "policies", where)) c.policies.push_back(parse_policy(p));
  }
  if (doc.contains("mode")) c.mode = parse_mode(get<std::string>(doc, "mode", where));
  if (doc.contains("bucket_width")) c.bucket_width = get_rational(doc["bucket_width"], "bucket_width");
  if (doc.contains("base_seed")) c.base_seed = get<std::uint64_t>(doc, "base_seed", where);
  if (doc.contains("beta")) c.beta = get_rational(doc["beta"], "beta");
  if (doc.contains("lambda_lo")) c.load.lo = get_rational(doc["lambda_lo"], "lambda_lo");
  if (doc.contains("lambda_hi")) c.load.hi = get_rational(doc["lambda_hi"], "lambda_hi");
  c.validate();
  return c;
}

inline Json to_json(const CampaignConfig& c) {
  Json policies = Json::array();
  for (auto p : c.policies) policies.push_back(to_string(p));
  Json j;
  j["n_runs"] = c.n_runs;
  j["cores"] = c.cores;
  j["duration_us"] = c.duration;
  j["policies"] = std::move(policies);
  j["mode"] = to_string(c.mode);
  j["bucket_width"] = c.bucket_width.str();
  j["base_seed"] = c.base_seed;
  j["beta"] = c.beta.str();
  j["lambda_lo"] = c.load.lo.str();
  j["lambda_hi"] = c.load.hi.str();
  return j;
}

}  // namespace json_io

}  // namespace mdag
