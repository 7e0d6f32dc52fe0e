#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ridgeopt/csv.hpp"
#include "ridgeopt/estimation.hpp"
#include "ridgeopt/genmodel.hpp"
#include "ridgeopt/risk.hpp"
#include "ridgeopt/stats.hpp"

namespace ridgeopt {

enum class Setting { FixedX, RandomX };

enum class Method { Min, Fp, Sfp, Sn, Default };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::Min: return "min";
    case Method::Fp: return "fp";
    case Method::Sfp: return "sfp";
    case Method::Sn: return "sn";
    case Method::Default: return "default";
  }
  return "?";
}

inline std::optional<Method> parse_method(const std::string& name) {
  if (name == "min") return Method::Min;
  if (name == "fp") return Method::Fp;
  if (name == "sfp") return Method::Sfp;
  if (name == "sn") return Method::Sn;
  if (name == "default") return Method::Default;
  return std::nullopt;
}

struct EvalConfig {
  Setting setting = Setting::RandomX;
  Index n = 100;
  Index d = 90;
  ProfileKind profile = ProfileKind::Spiked;
  Vector explicit_eigenvalues;  // used when profile == Explicit
  double epsilon = 1.0;
  std::size_t m_theta = 20;
  std::size_t m_x = 10;   // fixed-X designs per theta
  std::size_t m_y = 10;   // fixed-X label draws per design
  std::size_t m_xy = 20;  // random-X samples per theta
  Index n_test = 1000;
  std::vector<Method> methods;  // empty selects every applicable method
  std::uint64_t seed = 42;
  std::size_t bootstrap_resamples = 2000;
  double lambda0 = 1.0;
  double p = 0.25;
  double delta = 1e-4;
  int folds = 2;
  unsigned threads = 0;  // 0 means hardware concurrency
};

/// One scored replicate. i_y is -1 for quantities that do not depend on a
/// label draw (and for all random-X records, where i_x carries the joint
/// sample index).
struct EvalRecord {
  Method method = Method::Min;
  int i_theta = 0;
  int i_x = 0;
  int i_y = -1;
  double lambda = 0.0;
  double mse = 0.0;
};

/// Generative-parameter estimates behind one sfp replicate.
struct EstimateRecord {
  int i_theta = 0;
  int i_x = 0;
  int i_y = -1;
  double epsilon_hat = 0.0;
  double r_p = 0.0;
  double theta_hat_norm = 0.0;
};

struct SkippedReplicate {
  int i_theta = 0;
  int i_x = 0;
  int i_y = -1;
  std::string reason;
};

struct SkipReport {
  std::size_t attempted = 0;
  std::vector<SkippedReplicate> skipped;

  double rate() const {
    return attempted == 0 ? 0.0
                          : static_cast<double>(skipped.size()) / static_cast<double>(attempted);
  }
};

struct EvalResult {
  std::vector<EvalRecord> records;
  std::vector<EstimateRecord> estimates;
  std::vector<CiSummary> summaries;
  SkipReport skips;
};

namespace detail {

// Stream tags for seed derivation; replicate cells get independent streams
// keyed by their indices, so results do not depend on the execution schedule.
enum StreamTag : std::uint64_t {
  kThetaStream = 1,
  kTestXStream = 2,
  kTestYStream = 3,
  kTrainXStream = 4,
  kTrainYStream = 5,
  kSfpStream = 6,
  kBootstrapStream = 7,
};

inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& work) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          work(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline bool has_method(const std::vector<Method>& methods, Method m) {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

inline CovarianceProfile profile_from_config(const EvalConfig& config) {
  if (config.profile == ProfileKind::Explicit) {
    if (config.explicit_eigenvalues.size() != config.d)
      throw ConfigError("eigenvalues: expected " + std::to_string(config.d) +
                        " entries for the explicit profile, got " +
                        std::to_string(config.explicit_eigenvalues.size()));
    return make_explicit_profile(config.explicit_eigenvalues);
  }
  return make_profile(config.profile, config.d);
}

inline std::vector<Method> effective_methods(const EvalConfig& config) {
  std::vector<Method> all;
  if (config.setting == Setting::FixedX)
    all = {Method::Min, Method::Fp, Method::Sfp, Method::Sn, Method::Default};
  else
    all = {Method::Min, Method::Sfp, Method::Sn, Method::Default};
  if (config.methods.empty()) return all;
  for (Method m : config.methods)
    if (!has_method(all, m))
      throw ConfigError(std::string("methods: '") + method_name(m) +
                        "' is not available in this setting");
  return config.methods;
}

inline void validate(const EvalConfig& config) {
  if (config.n < 2) throw ConfigError("n: must be >= 2");
  if (config.d < 1) throw ConfigError("d: must be >= 1");
  if (config.epsilon < 0.0) throw ConfigError("epsilon: must be >= 0");
  if (config.m_theta < 1) throw ConfigError("m_theta: must be >= 1");
  if (config.setting == Setting::FixedX) {
    if (config.m_x < 1) throw ConfigError("m_x: must be >= 1");
    if (config.m_y < 1) throw ConfigError("m_y: must be >= 1");
  } else {
    if (config.m_xy < 1) throw ConfigError("m_xy: must be >= 1");
    if (config.n_test < 2) throw ConfigError("n_test: must be >= 2");
  }
  if (config.bootstrap_resamples < 2)
    throw ConfigError("bootstrap_resamples: must be >= 2");
  if (!(config.lambda0 > 0.0)) throw ConfigError("lambda0: must be > 0");
  if (config.p < 0.0) throw ConfigError("p: must be >= 0");
  if (!(config.delta > 0.0)) throw ConfigError("delta: must be > 0");
  if (config.folds < 2) throw ConfigError("folds: must be >= 2");
  effective_methods(config);
  profile_from_config(config);
}

struct CellOutput {
  std::vector<EvalRecord> records;
  std::vector<EstimateRecord> estimates;
  std::vector<SkippedReplicate> skipped;
};

}  // namespace detail

/// Per-method BCa summaries of the median regularization strength and median
/// MSE, in canonical method order. Record order within a method is preserved,
/// so identical records give identical summaries.
inline std::vector<CiSummary> aggregate_medians(const std::vector<EvalRecord>& records,
                                                std::size_t resamples,
                                                double confidence, std::uint64_t seed) {
  if (records.empty()) throw ConfigError("aggregate_medians: no records");
  std::vector<CiSummary> summaries;
  for (Method m : {Method::Min, Method::Fp, Method::Sfp, Method::Sn, Method::Default}) {
    std::vector<double> lambdas, mses;
    for (const EvalRecord& rec : records) {
      if (rec.method != m) continue;
      lambdas.push_back(rec.lambda);
      mses.push_back(rec.mse);
    }
    if (lambdas.empty()) continue;
    const auto mid = static_cast<std::uint64_t>(m);
    CiSummary lam = bca_interval(lambdas, resamples, confidence,
                                 derive_seed(seed, {detail::kBootstrapStream, mid, 0}));
    lam.method = method_name(m);
    lam.statistic = "median_lambda";
    CiSummary mse = bca_interval(mses, resamples, confidence,
                                 derive_seed(seed, {detail::kBootstrapStream, mid, 1}));
    mse.method = method_name(m);
    mse.statistic = "median_mse";
    summaries.push_back(std::move(lam));
    summaries.push_back(std::move(mse));
  }
  return summaries;
}

namespace detail {

inline void append_estimate_summaries(EvalResult& result, const EvalConfig& config) {
  if (result.estimates.empty()) return;
  std::vector<double> eps, rp, norms;
  for (const EstimateRecord& est : result.estimates) {
    eps.push_back(est.epsilon_hat);
    rp.push_back(est.r_p);
    norms.push_back(est.theta_hat_norm);
  }
  const std::pair<const char*, std::vector<double>*> stats[] = {
      {"median_epsilon_hat", &eps}, {"median_r_p", &rp}, {"median_theta_norm", &norms}};
  std::uint64_t tag = 100;
  for (const auto& [name, vec] : stats) {
    CiSummary s = bca_interval(*vec, config.bootstrap_resamples, 0.95,
                               derive_seed(config.seed, {kBootstrapStream, tag++}));
    s.method = method_name(Method::Sfp);
    s.statistic = name;
    result.summaries.push_back(std::move(s));
  }
}

inline EvalResult merge_cells(std::vector<CellOutput>&& cells, const EvalConfig& config,
                              std::size_t attempted) {
  EvalResult result;
  result.skips.attempted = attempted;
  for (CellOutput& cell : cells) {
    result.records.insert(result.records.end(), cell.records.begin(), cell.records.end());
    result.estimates.insert(result.estimates.end(), cell.estimates.begin(),
                            cell.estimates.end());
    result.skips.skipped.insert(result.skips.skipped.end(), cell.skipped.begin(),
                                cell.skipped.end());
  }
  if (!result.records.empty())
    result.summaries =
        aggregate_medians(result.records, config.bootstrap_resamples, 0.95, config.seed);
  append_estimate_summaries(result, config);
  return result;
}

}  // namespace detail

/// Fixed-X protocol: per (theta, X) cell the analytic MSE of Eq.-6 scores
/// every method; min/fp/default depend only on the design, sfp/sn are
/// re-estimated for each of m_y label draws. All failures land in the skip
/// report with their indices.
inline EvalResult evaluate_fixed_x(const EvalConfig& config) {
  detail::validate(config);
  if (config.setting != Setting::FixedX)
    throw ConfigError("setting: evaluate_fixed_x needs setting = fixed_x");
  const auto methods = detail::effective_methods(config);
  const CovarianceProfile profile = detail::profile_from_config(config);
  const ThetaBatch thetas = sample_theta_batch(
      config.d, config.m_theta, derive_seed(config.seed, {detail::kThetaStream}));

  const bool wants_sample = detail::has_method(methods, Method::Sfp) ||
                            detail::has_method(methods, Method::Sn);
  const std::size_t cell_count = config.m_theta * config.m_x;
  const std::size_t per_cell = wants_sample ? config.m_y : 1;
  std::vector<detail::CellOutput> cells(cell_count);

  detail::parallel_for(cell_count, config.threads, [&](std::size_t cell) {
    const int it = static_cast<int>(cell / config.m_x);
    const int ix = static_cast<int>(cell % config.m_x);
    detail::CellOutput& out = cells[cell];
    const Vector& theta = thetas.vectors[static_cast<std::size_t>(it)];

    try {
      const Matrix x = gen_x(config.n, profile,
                             derive_seed(config.seed, {detail::kTrainXStream,
                                                       static_cast<std::uint64_t>(it),
                                                       static_cast<std::uint64_t>(ix)}));
      const SvdBundle svd = decompose_centered(x);
      const RiskInputs inputs = make_risk_inputs(svd, theta, config.epsilon);

      if (detail::has_method(methods, Method::Min)) {
        const auto [lmin, mse] =
            lambda_min_search(inputs, kLambdaSearchLower, kLambdaSearchUpper);
        out.records.push_back({Method::Min, it, ix, -1, lmin, mse});
      }
      if (detail::has_method(methods, Method::Fp)) {
        const FixedPointOutcome fp = model_opt_reg(inputs, config.lambda0, config.delta);
        out.records.push_back({Method::Fp, it, ix, -1, fp.lambda_star, fp.mse_at_lambda});
      }
      if (detail::has_method(methods, Method::Default)) {
        out.records.push_back({Method::Default, it, ix, -1, config.lambda0,
                               expected_mse(inputs, config.lambda0).expected_oos_mse});
      }
      if (!wants_sample) return;

      SampleOptOptions opt;
      opt.lambda0 = config.lambda0;
      opt.p = config.p;
      opt.delta = config.delta;
      opt.folds = config.folds;
      for (int iy = 0; iy < static_cast<int>(config.m_y); ++iy) {
        try {
          const Vector y =
              gen_y(x, theta, config.epsilon,
                    derive_seed(config.seed, {detail::kTrainYStream,
                                              static_cast<std::uint64_t>(it),
                                              static_cast<std::uint64_t>(ix),
                                              static_cast<std::uint64_t>(iy)}));
          const RegStrengthRecommendation rec = sample_opt_reg(
              x, y, opt,
              derive_seed(config.seed, {detail::kSfpStream, static_cast<std::uint64_t>(it),
                                        static_cast<std::uint64_t>(ix),
                                        static_cast<std::uint64_t>(iy)}),
              &svd);
          out.estimates.push_back({it, ix, iy, rec.epsilon_hat_used,
                                   rec.noise.regularized_rank_value, rec.theta_hat_norm});
          if (detail::has_method(methods, Method::Sfp)) {
            out.records.push_back({Method::Sfp, it, ix, iy, rec.lambda,
                                   expected_mse(inputs, rec.lambda).expected_oos_mse});
          }
          if (detail::has_method(methods, Method::Sn)) {
            const double lsn =
                lambda_signal_to_noise(config.d, rec.epsilon_hat_used, rec.theta_hat_norm);
            out.records.push_back({Method::Sn, it, ix, iy, lsn,
                                   expected_mse(inputs, lsn).expected_oos_mse});
          }
        } catch (const Error& e) {
          out.skipped.push_back({it, ix, iy, e.what()});
        }
      }
    } catch (const Error& e) {
      // design-level failure: every replicate of this cell is skipped
      for (int iy = 0; iy < static_cast<int>(per_cell); ++iy)
        out.skipped.push_back({it, ix, wants_sample ? iy : -1, e.what()});
    }
  });

  return detail::merge_cells(std::move(cells), config, cell_count * per_cell);
}

/// Random-X protocol: one test sample per theta; per (theta, X-y) replicate
/// every method is scored by empirical MSE on that test sample. The minimizer
/// of the test MSE over lambda uses the same grid-plus-refinement machinery as
/// the analytic search.
inline EvalResult evaluate_random_x(const EvalConfig& config) {
  detail::validate(config);
  if (config.setting != Setting::RandomX)
    throw ConfigError("setting: evaluate_random_x needs setting = random_x");
  const auto methods = detail::effective_methods(config);
  const CovarianceProfile profile = detail::profile_from_config(config);
  const ThetaBatch thetas = sample_theta_batch(
      config.d, config.m_theta, derive_seed(config.seed, {detail::kThetaStream}));

  std::vector<Matrix> test_x(config.m_theta);
  std::vector<Vector> test_y(config.m_theta);
  for (std::size_t it = 0; it < config.m_theta; ++it) {
    test_x[it] = gen_x(config.n_test, profile,
                       derive_seed(config.seed, {detail::kTestXStream, it}));
    test_y[it] = gen_y(test_x[it], thetas.vectors[it], config.epsilon,
                       derive_seed(config.seed, {detail::kTestYStream, it}));
  }

  const bool wants_sample = detail::has_method(methods, Method::Sfp) ||
                            detail::has_method(methods, Method::Sn);
  const std::size_t cell_count = config.m_theta * config.m_xy;
  std::vector<detail::CellOutput> cells(cell_count);

  detail::parallel_for(cell_count, config.threads, [&](std::size_t cell) {
    const int it = static_cast<int>(cell / config.m_xy);
    const int ixy = static_cast<int>(cell % config.m_xy);
    detail::CellOutput& out = cells[cell];
    const Vector& theta = thetas.vectors[static_cast<std::size_t>(it)];

    try {
      const Matrix x = gen_x(config.n, profile,
                             derive_seed(config.seed, {detail::kTrainXStream,
                                                       static_cast<std::uint64_t>(it),
                                                       static_cast<std::uint64_t>(ixy)}));
      const Vector y = gen_y(x, theta, config.epsilon,
                             derive_seed(config.seed, {detail::kTrainYStream,
                                                       static_cast<std::uint64_t>(it),
                                                       static_cast<std::uint64_t>(ixy)}));
      const SvdBundle svd = decompose_centered(x);

      // Cache X_test V and U^T y so each test-MSE evaluation is O(n_test k).
      const Matrix test_proj = test_x[static_cast<std::size_t>(it)] * svd.right_vectors;
      const Vector coeffs = svd.left_vectors.transpose() * y;
      const Vector& y_ref = test_y[static_cast<std::size_t>(it)];
      Vector gains(svd.rank());
      auto test_mse = [&](double lambda) {
        for (Index j = 0; j < svd.rank(); ++j) {
          const double s = svd.singular_values(j);
          gains(j) = s * coeffs(j) / (s * s + lambda);
        }
        return (test_proj * gains - y_ref).squaredNorm() /
               static_cast<double>(config.n_test);
      };

      if (detail::has_method(methods, Method::Min)) {
        const double smin = svd.sigma_min();
        const double lo = std::max(
            kLambdaSearchLower, svd.min_feasible_lambda() + kLambdaGuardMargin * smin * smin);
        const auto [lmin, mse] = grid_refine_minimize(test_mse, lo, kLambdaSearchUpper);
        out.records.push_back({Method::Min, it, ixy, -1, lmin, mse});
      }
      if (wants_sample) {
        SampleOptOptions opt;
        opt.lambda0 = config.lambda0;
        opt.p = config.p;
        opt.delta = config.delta;
        opt.folds = config.folds;
        const RegStrengthRecommendation rec = sample_opt_reg(
            x, y, opt,
            derive_seed(config.seed, {detail::kSfpStream, static_cast<std::uint64_t>(it),
                                      static_cast<std::uint64_t>(ixy)}),
            &svd);
        out.estimates.push_back({it, ixy, -1, rec.epsilon_hat_used,
                                 rec.noise.regularized_rank_value, rec.theta_hat_norm});
        if (detail::has_method(methods, Method::Sfp))
          out.records.push_back({Method::Sfp, it, ixy, -1, rec.lambda, test_mse(rec.lambda)});
        if (detail::has_method(methods, Method::Sn)) {
          const double lsn =
              lambda_signal_to_noise(config.d, rec.epsilon_hat_used, rec.theta_hat_norm);
          out.records.push_back({Method::Sn, it, ixy, -1, lsn, test_mse(lsn)});
        }
      }
      if (detail::has_method(methods, Method::Default))
        out.records.push_back(
            {Method::Default, it, ixy, -1, config.lambda0, test_mse(config.lambda0)});
    } catch (const Error& e) {
      out.skipped.push_back({it, ixy, -1, e.what()});
    }
  });

  return detail::merge_cells(std::move(cells), config, cell_count);
}

inline EvalResult evaluate(const EvalConfig& config) {
  return config.setting == Setting::FixedX ? evaluate_fixed_x(config)
                                           : evaluate_random_x(config);
}

inline void write_records_csv(const std::string& path,
                              const std::vector<EvalRecord>& records) {
  CsvWriter csv(path);
  csv.row({"method", "i_theta", "i_x", "i_y", "lambda", "mse"});
  for (const EvalRecord& rec : records)
    csv.row({method_name(rec.method), std::to_string(rec.i_theta),
             std::to_string(rec.i_x), std::to_string(rec.i_y),
             format_double(rec.lambda), format_double(rec.mse)});
}

inline void write_summary_csv(const std::string& path,
                              const std::vector<CiSummary>& summaries) {
  CsvWriter csv(path);
  csv.row({"method", "statistic", "point", "lo", "hi", "resamples"});
  for (const CiSummary& s : summaries)
    csv.row({s.method, s.statistic, format_double(s.point), format_double(s.lo),
             format_double(s.hi), std::to_string(s.resamples)});
}

}  // namespace ridgeopt
