#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "visivar/curves.hpp"
#include "visivar/functionals.hpp"
#include "visivar/image.hpp"

namespace visivar {

/// One lattice axis enumerating start + k*step for k = 0..count()-1.
struct AxisSpec {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;

  void validate() const {
    if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step) ||
        !(step > 0.0) || !(start <= stop)) {
      throw std::invalid_argument(
          "grid axis: need finite start <= stop and step > 0");
    }
  }

  int count() const {
    // The slack absorbs quotient rounding so inclusive endpoints survive
    // (5 / 0.1 evaluates just under 50).
    return static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
  }

  double value(int k) const { return start + k * step; }
};

/// Four-axis parameter lattice searched exhaustively.
struct SearchGrid {
  AxisSpec a1;
  AxisSpec a2;
  AxisSpec alpha;
  AxisSpec beta;

  void validate() const {
    a1.validate();
    a2.validate();
    alpha.validate();
    beta.validate();
  }

  std::int64_t total_candidates() const {
    return static_cast<std::int64_t>(a1.count()) * a2.count() * alpha.count() *
           beta.count();
  }
};

/// Default search ranges: a1 in [0, 5], a2 in [0, 3], alpha and beta in
/// [0.1, 1.0], all with step 0.1 (158,100 candidates).
inline SearchGrid default_grid() {
  return SearchGrid{{0.0, 5.0, 0.1}, {0.0, 3.0, 0.1}, {0.1, 1.0, 0.1},
                    {0.1, 1.0, 0.1}};
}

/// Parse the axis text form "start:stop:step".
inline AxisSpec parse_axis(std::string_view text) {
  const std::string s(text);
  AxisSpec axis;
  char trailing = '\0';
  if (std::sscanf(s.c_str(), " %lf : %lf : %lf %c", &axis.start, &axis.stop,
                  &axis.step, &trailing) != 3) {
    throw std::invalid_argument(
        "grid axis: expected \"start:stop:step\", got \"" + s + "\"");
  }
  axis.validate();
  return axis;
}

struct TraceEntry {
  double a1 = 0.0;
  double a2 = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double visibility = 0.0;
  double variance = 0.0;
  bool accepted = false;
};

struct SearchResult {
  TransformParams best_params;
  VisibilityReport best_report;
  std::int64_t candidates_total = 0;
  std::int64_t candidates_rejected = 0;
  std::vector<TraceEntry> trace;  // full lattice order when collected
};

struct OptimizeOptions {
  int workers = 1;  // <= 0 means one per hardware thread
  bool collect_trace = false;
};

class InfeasibleSearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluate one parameter set against an image histogram: compile the curve,
/// reject it if any occupied tone leaves [0, 255], otherwise report the
/// functionals via the histogram path.
inline std::variant<VisibilityReport, RangeViolation> evaluate_candidate(
    const Histogram& histogram, const TransformParams& params) {
  if (histogram.total <= 0) {
    throw std::invalid_argument("evaluate_candidate: empty histogram");
  }
  const ToneCurve curve = pivot_power_curve(params);
  if (const auto violation = find_range_violation(curve, histogram)) {
    return *violation;
  }
  return report_from_lut(histogram, curve.lut);
}

namespace detail {

struct WorkerBest {
  double visibility = -1.0;
  std::int64_t index = -1;
  VisibilityReport report;
  std::int64_t rejected = 0;
};

}  // namespace detail

/// Exhaustive search of the lattice for the parameters maximizing the
/// visibility functional, with lexicographic (a1, a2, alpha, beta)
/// tie-breaking — the smallest wins. The pivot is the mean of the input
/// image. Candidate evaluations are pure, so grid points may be scored on
/// any number of workers; the reduction keeps the result independent of the
/// worker count.
inline SearchResult optimize(const BrightnessImage& image,
                             const SearchGrid& grid,
                             const OptimizeOptions& options = {}) {
  grid.validate();
  const double pivot = brightness_mean(image);
  const Histogram hist = compute_histogram(image);

  std::vector<int> occ_tone;
  std::vector<std::int64_t> occ_count;
  for (int t = 0; t < 256; ++t) {
    if (hist.counts[static_cast<std::size_t>(t)] > 0) {
      occ_tone.push_back(t);
      occ_count.push_back(hist.counts[static_cast<std::size_t>(t)]);
    }
  }
  const std::size_t n_occ = occ_tone.size();

  const int na1 = grid.a1.count();
  const int na2 = grid.a2.count();
  const int nal = grid.alpha.count();
  const int nbe = grid.beta.count();
  const std::int64_t total = grid.total_candidates();

  std::vector<double> a1_vals(na1), a2_vals(na2), al_vals(nal), be_vals(nbe);
  for (int k = 0; k < na1; ++k) a1_vals[k] = grid.a1.value(k);
  for (int k = 0; k < na2; ++k) a2_vals[k] = grid.a2.value(k);
  for (int k = 0; k < nal; ++k) al_vals[k] = grid.alpha.value(k);
  for (int k = 0; k < nbe; ++k) be_vals[k] = grid.beta.value(k);

  // The powered weights depend only on (tone, exponent), so they are shared
  // across all amplitudes. The expressions mirror pivot_power_curve exactly,
  // keeping the fast path bit-identical to evaluate_candidate.
  std::vector<std::array<double, 256>> lowpow(nal), highpow(nbe);
  for (int k = 0; k < nal; ++k) {
    for (int t = 0; t < 256; ++t) {
      lowpow[k][static_cast<std::size_t>(t)] =
          std::pow(detail::low_branch_weight(t, pivot), al_vals[k]);
    }
  }
  for (int k = 0; k < nbe; ++k) {
    for (int t = 0; t < 256; ++t) {
      highpow[k][static_cast<std::size_t>(t)] =
          std::pow(detail::high_branch_weight(t, pivot), be_vals[k]);
    }
  }

  std::vector<TraceEntry> trace;
  if (options.collect_trace) {
    trace.resize(static_cast<std::size_t>(total));
  }
  TraceEntry* trace_data = trace.empty() ? nullptr : trace.data();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  auto scan_range = [&](std::int64_t lo, std::int64_t hi,
                        detail::WorkerBest& best) {
    std::vector<double> values(n_occ);
    for (std::int64_t idx = lo; idx < hi; ++idx) {
      std::int64_t rest = idx;
      const int ibe = static_cast<int>(rest % nbe);
      rest /= nbe;
      const int ial = static_cast<int>(rest % nal);
      rest /= nal;
      const int ia2 = static_cast<int>(rest % na2);
      rest /= na2;
      const int ia1 = static_cast<int>(rest);
      const double a1 = a1_vals[static_cast<std::size_t>(ia1)];
      const double a2 = a2_vals[static_cast<std::size_t>(ia2)];

      bool rejected = false;
      for (std::size_t i = 0; i < n_occ; ++i) {
        const int t = occ_tone[i];
        const auto ti = static_cast<std::size_t>(t);
        const double v =
            t <= pivot
                ? detail::low_branch_value(
                      t, a1, lowpow[static_cast<std::size_t>(ial)][ti])
                : detail::high_branch_value(
                      t, a2, highpow[static_cast<std::size_t>(ibe)][ti]);
        if (!(v >= 0.0 && v <= 255.0)) {
          rejected = true;
          break;
        }
        values[i] = v;
      }
      if (rejected) {
        ++best.rejected;
        if (trace_data) {
          trace_data[idx] = {a1,
                             a2,
                             al_vals[static_cast<std::size_t>(ial)],
                             be_vals[static_cast<std::size_t>(ibe)],
                             nan,
                             nan,
                             false};
        }
        continue;
      }
      const VisibilityReport rep = detail::weighted_report(
          values.data(), occ_count.data(), n_occ, hist.total);
      if (trace_data) {
        trace_data[idx] = {a1,
                           a2,
                           al_vals[static_cast<std::size_t>(ial)],
                           be_vals[static_cast<std::size_t>(ibe)],
                           rep.visibility,
                           rep.variance,
                           true};
      }
      // Ascending scan + strict improvement keeps the first (lexicographic
      // smallest) maximum.
      if (rep.visibility > best.visibility) {
        best.visibility = rep.visibility;
        best.index = idx;
        best.report = rep;
      }
    }
  };

  int workers = options.workers;
  if (workers <= 0) {
    workers = static_cast<int>(
        std::max(1u, std::thread::hardware_concurrency()));
  }
  if (static_cast<std::int64_t>(workers) > total) {
    workers = static_cast<int>(total);
  }

  std::vector<detail::WorkerBest> bests(static_cast<std::size_t>(workers));
  if (workers == 1) {
    scan_range(0, total, bests[0]);
  } else {
    const std::int64_t chunk = (total + workers - 1) / workers;
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      const std::int64_t lo = w * chunk;
      const std::int64_t hi = std::min(total, lo + chunk);
      threads.emplace_back([&, w, lo, hi] {
        try {
          scan_range(lo, hi, bests[static_cast<std::size_t>(w)]);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  // Chunks cover ascending index ranges, so merging in worker order with
  // strict improvement preserves the sequential tie-break.
  detail::WorkerBest global;
  std::int64_t rejected = 0;
  for (const auto& b : bests) {
    rejected += b.rejected;
    if (b.index >= 0 && b.visibility > global.visibility) {
      global = b;
      global.rejected = 0;
    }
  }
  if (global.index < 0) {
    throw InfeasibleSearchError(
        "no feasible variation: every candidate was rejected");
  }

  std::int64_t rest = global.index;
  const int ibe = static_cast<int>(rest % nbe);
  rest /= nbe;
  const int ial = static_cast<int>(rest % nal);
  rest /= nal;
  const int ia2 = static_cast<int>(rest % na2);
  rest /= na2;
  const int ia1 = static_cast<int>(rest);

  SearchResult result;
  result.best_params = TransformParams{a1_vals[static_cast<std::size_t>(ia1)],
                                       a2_vals[static_cast<std::size_t>(ia2)],
                                       al_vals[static_cast<std::size_t>(ial)],
                                       be_vals[static_cast<std::size_t>(ibe)],
                                       pivot};
  result.best_report = global.report;
  result.candidates_total = total;
  result.candidates_rejected = rejected;
  result.trace = std::move(trace);
  return result;
}

/// Candidate audit trail: one row per lattice point in lattice order.
/// Rejected candidates keep their parameter columns and an accepted flag of
/// 0; their visibility and variance columns are empty.
inline void write_trace_csv(std::ostream& os, const SearchResult& result) {
  os << "a1,a2,alpha,beta,visibility,variance,accepted\n";
  char line[192];
  for (const TraceEntry& e : result.trace) {
    if (e.accepted) {
      std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,1\n",
                    e.a1, e.a2, e.alpha, e.beta, e.visibility, e.variance);
    } else {
      std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g,,,0\n", e.a1,
                    e.a2, e.alpha, e.beta);
    }
    os << line;
  }
}

}  // namespace visivar
