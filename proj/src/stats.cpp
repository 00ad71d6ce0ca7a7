#include "homog/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "homog/errors.hpp"
#include "homog/io.hpp"
#include "homog/parallel.hpp"
#include "homog/rng.hpp"

namespace homog {

IteratedStats::IteratedStats(int d) : S(Vec::Zero(d)), SS(Mat::Zero(d, d)), Q(Mat::Zero(d, d)) {}

void IteratedStats::push(const Vec& v) {
  SS.noalias() += S * v.transpose();
  S += v;
  Q.noalias() += v * v.transpose();
  ++n;
}

double IteratedStats::pair_identity_residual() const {
  const Mat r = S * S.transpose() - SS - SS.transpose() - Q;
  const double scale = std::max({S.squaredNorm(), Q.norm(), SS.norm(), 1e-300});
  return r.norm() / scale;
}

IteratedStats iterated_sums_stream(const std::vector<Vec>& values) {
  IteratedStats st(values.empty() ? 1 : static_cast<int>(values.front().size()));
  for (const Vec& v : values) st.push(v);
  return st;
}

std::string to_string(MomentStat s) { return s == MomentStat::kS ? "S" : "SS"; }

std::string to_string(CoefficientMethod m) {
  switch (m) {
    case CoefficientMethod::kDirect: return "direct";
    case CoefficientMethod::kGreenKubo: return "green_kubo";
    case CoefficientMethod::kMartingale: return "martingale";
    case CoefficientMethod::kConsensus: return "consensus";
  }
  return "unknown";
}

const MomentRow& MomentTable::row(std::size_t n, double q, MomentStat stat) const {
  for (const MomentRow& r : rows)
    if (r.n == n && r.q == q && r.stat == stat) return r;
  throw ConfigError("moment table has no row for n=" + std::to_string(n) +
                    " q=" + std::to_string(q) + " stat=" + to_string(stat));
}

namespace {

constexpr std::size_t kBlock = 64;  // samples per parallel work unit

double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sd_of(const std::vector<double>& x) {
  const double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

double percentile(std::vector<double> x, double p) {
  std::sort(x.begin(), x.end());
  const double pos = p * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

}  // namespace

MomentTable moment_table(const MapSpec& spec, const Observable& v, const MomentOptions& opt) {
  if (opt.samples < 100) throw ConfigError("samples: at least 100 samples are required");
  if (opt.n_grid.empty()) throw ConfigError("n: the n grid is empty");
  if (opt.q_grid.empty()) throw ConfigError("q: the q grid is empty");
  std::vector<std::size_t> grid = opt.n_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  struct RowKey {
    std::size_t g;
    double q;
    MomentStat stat;
  };
  std::vector<RowKey> keys;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (double q : opt.q_grid) {
      if (!(q > 0.0)) throw ConfigError("q: moment exponents must be positive");
      const bool s_ok = opt.allow_high_q || q <= 2.0 * (spec.p - 1.0);
      const bool ss_ok = opt.allow_high_q || q <= spec.p - 1.0;
      if (!s_ok && !ss_ok)
        throw ConfigError("q: exponent " + std::to_string(q) +
                          " exceeds the guaranteed range 2(p-1) for S and p-1 for SS; set "
                          "allow_high_q to override");
      if (s_ok) keys.push_back({g, q, MomentStat::kS});
      if (ss_ok) keys.push_back({g, q, MomentStat::kSS});
    }
  }

  const std::size_t M = opt.samples, G = grid.size();
  std::vector<double> max_s(G * M), max_ss(G * M);
  const OrbitSource src = opt.source();
  parallel_blocks(M, kBlock, resolve_workers(opt.workers), [&](std::size_t b, std::size_t e) {
    run_samples(spec, v, src, b, e, grid, true, [&](std::size_t i, std::size_t g, const auto& s) {
      max_s[g * M + i] = std::sqrt(s.max_s2);
      max_ss[g * M + i] = std::sqrt(s.max_ss2);
    });
  });

  MomentTable table;
  table.samples = M;
  table.seed = opt.seed;
  table.initial = opt.initial;
  table.bootstrap = opt.bootstrap;
  std::vector<std::vector<double>> powered(keys.size(), std::vector<double>(M));
  for (std::size_t r = 0; r < keys.size(); ++r) {
    const auto& src_max = keys[r].stat == MomentStat::kS ? max_s : max_ss;
    for (std::size_t i = 0; i < M; ++i) powered[r][i] = std::pow(src_max[keys[r].g * M + i], keys[r].q);
    table.rows.push_back({grid[keys[r].g], keys[r].q, keys[r].stat, mean_of(powered[r]), 0.0, M});
  }

  const std::size_t R = keys.size(), B = opt.bootstrap;
  table.boot.assign(B * R, 0.0);
  parallel_blocks(B, 8, resolve_workers(opt.workers), [&](std::size_t b0, std::size_t b1) {
    std::vector<std::size_t> idx(M);
    for (std::size_t b = b0; b < b1; ++b) {
      RngStream rng(opt.seed, b, StreamPurpose::kBootstrap);
      for (auto& k : idx) k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(M));
      for (std::size_t r = 0; r < R; ++r) {
        double s = 0.0;
        for (std::size_t k : idx) s += powered[r][k];
        table.boot[b * R + r] = s / static_cast<double>(M);
      }
    }
  });
  if (B >= 2) {
    for (std::size_t r = 0; r < R; ++r) {
      std::vector<double> reps(B);
      for (std::size_t b = 0; b < B; ++b) reps[b] = table.boot[b * R + r];
      table.rows[r].std_err = sd_of(reps);
    }
  }
  return table;
}

ScalingFit scaling_exponent(const MomentTable& table, MomentStat stat, double q) {
  std::vector<std::size_t> idx;
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    if (table.rows[r].stat == stat && table.rows[r].q == q) idx.push_back(r);
  if (idx.size() < 4) throw ConfigError("n: scaling fit needs at least 4 distinct n values");
  const double n_lo = static_cast<double>(table.rows[idx.front()].n);
  const double n_hi = static_cast<double>(table.rows[idx.back()].n);
  if (!(n_lo > 0.0) || n_hi / n_lo < 100.0 * (1.0 - 1e-12))
    throw ConfigError("n: scaling fit needs the n grid to span at least two decades");

  std::vector<double> x, y;
  for (std::size_t r : idx) {
    const MomentRow& row = table.rows[r];
    if (!(row.value > 0.0))
      throw DomainError("degenerate moments: the " + to_string(stat) + " moment is zero at n=" +
                        std::to_string(row.n));
    x.push_back(std::log(static_cast<double>(row.n)));
    y.push_back(std::log(row.value) / q);
  }
  ScalingFit fit{stat, q, ls_slope(x, y), 0.0, 0.0};
  const std::size_t R = table.rows.size();
  std::vector<double> slopes;
  for (std::size_t b = 0; b < table.bootstrap; ++b) {
    std::vector<double> yb;
    bool ok = true;
    for (std::size_t r : idx) {
      const double m = table.boot[b * R + r];
      ok = ok && m > 0.0;
      yb.push_back(std::log(m) / q);
    }
    if (ok) slopes.push_back(ls_slope(x, yb));
  }
  if (slopes.size() >= 2) {
    fit.ci_lo = percentile(slopes, 0.025);
    fit.ci_hi = percentile(slopes, 0.975);
  } else {
    fit.ci_lo = fit.ci_hi = fit.slope;
  }
  return fit;
}

std::vector<ScalingFit> scaling_exponents(const MomentTable& table) {
  std::vector<std::pair<MomentStat, double>> combos;
  for (const MomentRow& r : table.rows) {
    const auto c = std::make_pair(r.stat, r.q);
    if (std::find(combos.begin(), combos.end(), c) == combos.end()) combos.push_back(c);
  }
  std::vector<ScalingFit> out;
  for (const auto& [stat, q] : combos) out.push_back(scaling_exponent(table, stat, q));
  return out;
}

namespace {

template <int D, class Stepper, class Eval>
CoefficientEstimate green_kubo_impl(const Stepper& stepper, const Eval& eval, std::size_t n_max,
                                    std::size_t orbit_len, const RunOptions& opt) {
  constexpr std::size_t kBatches = 100;
  constexpr int DD = D * D;
  const std::size_t lags = n_max + 1;
  const std::size_t batch_len = orbit_len / kBatches;

  // values of the last `lags` steps, stored twice so any window is contiguous
  std::vector<double> ring(2 * lags * D, 0.0);
  std::vector<double> acc(lags * DD, 0.0), total(lags * DD, 0.0);
  std::vector<double> count(lags, 0.0), total_count(lags, 0.0);
  std::vector<Mat> batch_sigma, batch_e;

  auto state = start_orbit(stepper, opt.seed, 0, InitialMeasure::kMu, opt.burnin);
  auto finish_batch = [&] {
    Mat sig = Mat::Zero(D, D), e = Mat::Zero(D, D);
    for (std::size_t k = 0; k < lags; ++k) {
      if (count[k] == 0.0) continue;
      Mat c(D, D);
      for (int a = 0; a < DD; ++a) c(a / D, a % D) = acc[k * DD + a] / count[k];
      if (k == 0) {
        sig += c;
      } else {
        sig += c + c.transpose();
        e += c;
      }
    }
    batch_sigma.push_back(sig);
    batch_e.push_back(e);
    for (std::size_t i = 0; i < acc.size(); ++i) total[i] += acc[i];
    for (std::size_t k = 0; k < lags; ++k) total_count[k] += count[k];
    std::fill(acc.begin(), acc.end(), 0.0);
    std::fill(count.begin(), count.end(), 0.0);
  };

  std::size_t pos = 0;  // slot of the current value in the ring
  double v[D];
  for (std::size_t t = 0; t < kBatches * batch_len; ++t) {
    eval(Stepper::value(state), v);
    stepper.advance(state);
    for (int i = 0; i < D; ++i) {
      ring[pos * D + i] = v[i];
      ring[(pos + lags) * D + i] = v[i];
    }
    // lag k pairs the value at slot pos + lags - k with the current one
    const std::size_t avail = std::min(t, n_max);
    const double* window = &ring[(pos + lags) * D];
    for (std::size_t k = 0; k <= avail; ++k) {
      const double* past = window - k * D;
      double* a = &acc[k * DD];
      for (int i = 0; i < D; ++i)
        for (int j = 0; j < D; ++j) a[i * D + j] += past[i] * v[j];
    }
    for (std::size_t k = 0; k <= avail; ++k) count[k] += 1.0;
    pos = pos + 1 == lags ? 0 : pos + 1;
    if ((t + 1) % batch_len == 0) finish_batch();
  }

  CoefficientEstimate est;
  est.method = CoefficientMethod::kGreenKubo;
  est.truncation_kind = "N_max";
  est.truncation = n_max;
  est.Sigma = Mat::Zero(D, D);
  est.E = Mat::Zero(D, D);
  for (std::size_t k = 0; k < lags; ++k) {
    Mat c(D, D);
    for (int a = 0; a < DD; ++a) c(a / D, a % D) = total[k * DD + a] / total_count[k];
    if (k == 0) {
      est.Sigma += c;
    } else {
      est.Sigma += c + c.transpose();
      est.E += c;
    }
  }
  est.Sigma_se = Mat::Zero(D, D);
  est.E_se = Mat::Zero(D, D);
  const double nb = static_cast<double>(batch_sigma.size());
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) {
      std::vector<double> s, e;
      for (std::size_t b = 0; b < batch_sigma.size(); ++b) {
        s.push_back(batch_sigma[b](i, j));
        e.push_back(batch_e[b](i, j));
      }
      est.Sigma_se(i, j) = sd_of(s) / std::sqrt(nb);
      est.E_se(i, j) = sd_of(e) / std::sqrt(nb);
    }
  return est;
}

}  // namespace

CoefficientEstimate green_kubo(const MapSpec& spec, const Observable& v, std::size_t n_max,
                               std::size_t orbit_len, const RunOptions& opt) {
  if (orbit_len < 100 || n_max >= orbit_len / 100)
    throw ConfigError("N_max: the truncation lag must be below orbit_len/100");
  return with_stepper(spec, [&](const auto& stepper) {
    return with_evaluator(v, [&](const auto& eval) {
      return with_eval_dim(eval, v.dim(), [&](auto dim) {
        return green_kubo_impl<decltype(dim)::value>(stepper, eval, n_max, orbit_len, opt);
      });
    });
  });
}

CoefficientEstimate direct_coeffs(const MapSpec& spec, const Observable& v, std::size_t n,
                                  std::size_t samples, const RunOptions& opt) {
  if (samples < 2) throw ConfigError("samples: at least 2 samples are required");
  if (n < 1) throw ConfigError("n: orbit length must be positive");
  const int d = v.dim();
  const std::size_t dd = static_cast<std::size_t>(d * d);
  // per sample: S(x)S / n then SS / n
  std::vector<double> per(samples * 2 * dd);
  const std::array<std::size_t, 1> checkpoint{n};
  const double inv_n = 1.0 / static_cast<double>(n);
  const OrbitSource src = opt.source();
  parallel_blocks(samples, kBlock, resolve_workers(opt.workers), [&](std::size_t b, std::size_t e) {
    run_samples(spec, v, src, b, e, checkpoint, false,
                [&](std::size_t i, std::size_t, const auto& s) {
                  double* out = &per[i * 2 * dd];
                  for (int a = 0; a < d; ++a)
                    for (int c = 0; c < d; ++c) {
                      out[a * d + c] = s.S[a] * s.S[c] * inv_n;
                      out[dd + a * d + c] = s.SS[a * d + c] * inv_n;
                    }
                });
  });
  CoefficientEstimate est;
  est.method = CoefficientMethod::kDirect;
  est.truncation_kind = "n";
  est.truncation = n;
  est.Sigma = Mat::Zero(d, d);
  est.E = Mat::Zero(d, d);
  est.Sigma_se = Mat::Zero(d, d);
  est.E_se = Mat::Zero(d, d);
  const double m = static_cast<double>(samples);
  for (std::size_t k = 0; k < 2 * dd; ++k) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < samples; ++i) s += per[i * 2 * dd + k];
    const double mean = s / m;
    for (std::size_t i = 0; i < samples; ++i) {
      const double dev = per[i * 2 * dd + k] - mean;
      s2 += dev * dev;
    }
    const double se = std::sqrt(s2 / (m - 1.0) / m);
    const int a = static_cast<int>((k % dd) / static_cast<std::size_t>(d));
    const int c = static_cast<int>(k % static_cast<std::size_t>(d));
    if (k < dd) {
      est.Sigma(a, c) = mean;
      est.Sigma_se(a, c) = se;
    } else {
      est.E(a, c) = mean;
      est.E_se(a, c) = se;
    }
  }
  return est;
}

CoefficientEstimate consensus(std::span<const CoefficientEstimate> estimates) {
  if (estimates.empty()) throw ConfigError("consensus of no estimates");
  const int d = static_cast<int>(estimates.front().Sigma.rows());
  CoefficientEstimate out;
  out.method = CoefficientMethod::kConsensus;
  out.truncation_kind = "combined";
  out.Sigma = Mat::Zero(d, d);
  out.E = Mat::Zero(d, d);
  out.Sigma_se = Mat::Zero(d, d);
  out.E_se = Mat::Zero(d, d);
  auto combine = [&](auto value, auto se, Mat& out_v, Mat& out_se) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double w_sum = 0.0, acc = 0.0;
        for (const CoefficientEstimate& e : estimates) {
          const double s = std::max(se(e)(i, j), 1e-15);
          const double w = 1.0 / (s * s);
          w_sum += w;
          acc += w * value(e)(i, j);
        }
        out_v(i, j) = acc / w_sum;
        out_se(i, j) = 1.0 / std::sqrt(w_sum);
      }
  };
  combine([](const CoefficientEstimate& e) -> const Mat& { return e.Sigma; },
          [](const CoefficientEstimate& e) -> const Mat& { return e.Sigma_se; }, out.Sigma,
          out.Sigma_se);
  combine([](const CoefficientEstimate& e) -> const Mat& { return e.E; },
          [](const CoefficientEstimate& e) -> const Mat& { return e.E_se; }, out.E, out.E_se);
  return out;
}

void write_moment_csv(std::ostream& os, const MomentTable& table) {
  CsvWriter csv(os, {"n", "q", "stat", "value", "stderr", "M"});
  for (const MomentRow& r : table.rows) {
    csv.cell(r.n).cell(r.q).cell(to_string(r.stat)).cell(r.value).cell(r.std_err).cell(r.samples);
    csv.end_row();
  }
}

void write_coeff_csv(std::ostream& os, std::span<const CoefficientEstimate> estimates) {
  CsvWriter csv(os, {"method", "coefficient", "i", "j", "value", "stderr"});
  for (const CoefficientEstimate& e : estimates) {
    for (int i = 0; i < e.Sigma.rows(); ++i)
      for (int j = 0; j < e.Sigma.cols(); ++j) {
        csv.cell(to_string(e.method)).cell("Sigma").cell(i).cell(j).cell(e.Sigma(i, j));
        csv.cell(e.Sigma_se(i, j));
        csv.end_row();
      }
    for (int i = 0; i < e.E.rows(); ++i)
      for (int j = 0; j < e.E.cols(); ++j) {
        csv.cell(to_string(e.method)).cell("E").cell(i).cell(j).cell(e.E(i, j)).cell(e.E_se(i, j));
        csv.end_row();
      }
  }
}

}  // namespace homog
