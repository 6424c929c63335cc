#include "noncelab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "noncelab/errors.hpp"

namespace noncelab {

ClassMoments::ClassMoments(size_t width) : width_(width) {
  for (int c = 0; c < 2; ++c) {
    mean_[c].assign(width, 0.0);
    m2_[c].assign(width, 0.0);
  }
}

void ClassMoments::add(std::span<const double> row, int label) {
  if (row.size() != width_) throw StatError("row length differs from the accumulator width");
  const int c = label != 0;
  const double n = static_cast<double>(++n_[c]);
  for (size_t j = 0; j < width_; ++j) {
    const double d = row[j] - mean_[c][j];
    mean_[c][j] += d / n;
    m2_[c][j] += d * (row[j] - mean_[c][j]);
    abs_sum_ += std::abs(row[j]);
  }
}

void ClassMoments::merge(const ClassMoments& o) {
  if (o.width_ != width_) throw StatError("cannot merge accumulators of different widths");
  for (int c = 0; c < 2; ++c) {
    if (o.n_[c] == 0) continue;
    const double na = static_cast<double>(n_[c]), nb = static_cast<double>(o.n_[c]), n = na + nb;
    for (size_t j = 0; j < width_; ++j) {
      const double d = o.mean_[c][j] - mean_[c][j];
      mean_[c][j] += d * nb / n;
      m2_[c][j] += o.m2_[c][j] + d * d * na * nb / n;
    }
    n_[c] += o.n_[c];
  }
  abs_sum_ += o.abs_sum_;
}

std::vector<double> ClassMoments::variance(int label) const {
  const int c = label != 0;
  if (n_[c] < 2) throw StatError("variance needs at least two rows per class");
  std::vector<double> v(width_);
  for (size_t j = 0; j < width_; ++j) v[j] = m2_[c][j] / static_cast<double>(n_[c] - 1);
  return v;
}

double ClassMoments::mean_abs() const {
  const size_t n = n_[0] + n_[1];
  return n && width_ ? abs_sum_ / static_cast<double>(n * width_) : 0.0;
}

namespace {

ClassMoments moments_of(const FeatureMatrix& rows, std::span<const int> labels) {
  if (rows.size() != labels.size()) throw StatError("row and label counts differ");
  if (rows.empty()) throw StatError("no rows");
  ClassMoments m(rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i) m.add(rows[i], labels[i]);
  return m;
}

}  // namespace

TTestResult welch_t(const ClassMoments& m) {
  if (m.count(0) < 2 || m.count(1) < 2) throw StatError("t-test needs at least two traces per class");
  const auto v0 = m.variance(0), v1 = m.variance(1);
  const double n0 = static_cast<double>(m.count(0)), n1 = static_cast<double>(m.count(1));
  TTestResult r;
  r.n0 = m.count(0);
  r.n1 = m.count(1);
  r.t_values.resize(m.width());
  for (size_t j = 0; j < m.width(); ++j) {
    const double se = std::sqrt(v0[j] / n0 + v1[j] / n1);
    const double diff = m.mean(1)[j] - m.mean(0)[j];
    // constant columns carry no evidence either way
    r.t_values[j] = se > 0 ? diff / se : 0.0;
    r.max_abs_t = std::max(r.max_abs_t, std::abs(r.t_values[j]));
  }
  return r;
}

TTestResult welch_t(const FeatureMatrix& rows, std::span<const int> labels) {
  return welch_t(moments_of(rows, labels));
}

TTestResult welch_t(const TraceSet& set) {
  if (set.traces.size() != set.labels.size()) throw StatError("trace and label counts differ");
  if (set.traces.empty()) throw StatError("no traces");
  ClassMoments m(set.traces.front().samples.size());
  std::vector<double> row;
  for (size_t i = 0; i < set.traces.size(); ++i) {
    if (set.labels[i].empty()) throw StatError("trace without a label");
    row.assign(set.traces[i].samples.begin(), set.traces[i].samples.end());
    m.add(row, set.labels[i].front());
  }
  return welch_t(m);
}

std::vector<size_t> select_poi(const TTestResult& t, size_t count) {
  if (count > t.t_values.size()) throw ConfigError("more points of interest than samples");
  std::vector<size_t> idx(t.t_values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return std::abs(t.t_values[a]) > std::abs(t.t_values[b]); });
  idx.resize(count);
  return idx;
}

TemplateModel fit_templates(const ClassMoments& m, std::span<const size_t> poi_in, const TemplateOptions& opt) {
  if (opt.full_covariance) throw StatError("full covariance needs the rows, not only moments");
  if (poi_in.empty()) throw ConfigError("no points of interest");
  if (m.count(0) < 2 || m.count(1) < 2) throw StatError("templates need at least two rows per class");
  std::vector<size_t> poi(poi_in.begin(), poi_in.end());
  std::sort(poi.begin(), poi.end());
  if (poi.back() >= m.width()) throw ConfigError("point of interest outside the window");
  const auto v0 = m.variance(0), v1 = m.variance(1);
  const double n0 = static_cast<double>(m.count(0)), n1 = static_cast<double>(m.count(1));
  const double ridge = opt.ridge * m.mean_abs();
  TemplateModel t;
  for (size_t j : poi) {
    t.poi.push_back(static_cast<uint32_t>(j));
    t.mean0.push_back(m.mean(0)[j]);
    t.mean1.push_back(m.mean(1)[j]);
    const double v = ((n0 - 1) * v0[j] + (n1 - 1) * v1[j]) / (n0 + n1 - 2) + ridge;
    if (!(v > 0) || !std::isfinite(v)) throw StatError("singular covariance after regularization");
    t.pooled_cov.push_back(v);
  }
  t.trained_on["rows0"] = std::to_string(m.count(0));
  t.trained_on["rows1"] = std::to_string(m.count(1));
  return t;
}

TemplateModel fit_templates(const FeatureMatrix& rows, std::span<const int> labels, std::span<const size_t> poi_in,
                            const TemplateOptions& opt) {
  const ClassMoments m = moments_of(rows, labels);
  if (!opt.full_covariance) return fit_templates(m, poi_in, opt);

  if (poi_in.empty()) throw ConfigError("no points of interest");
  std::vector<size_t> poi(poi_in.begin(), poi_in.end());
  std::sort(poi.begin(), poi.end());
  if (poi.back() >= m.width()) throw ConfigError("point of interest outside the window");
  const size_t k = poi.size();
  if (m.count(0) < 10 * k || m.count(1) < 10 * k)
    throw StatError("full covariance needs at least 10 rows per class and point of interest");

  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  Eigen::VectorXd d(static_cast<Eigen::Index>(k));
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& mu = m.mean(labels[i]);
    for (size_t a = 0; a < k; ++a) d[static_cast<Eigen::Index>(a)] = rows[i][poi[a]] - mu[poi[a]];
    S.selfadjointView<Eigen::Lower>().rankUpdate(d);
  }
  S = S.selfadjointView<Eigen::Lower>();
  S /= static_cast<double>(rows.size() - 2);
  S.diagonal().array() += opt.ridge * m.mean_abs();
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) throw StatError("singular covariance after regularization");

  TemplateModel t;
  t.full_covariance = true;
  for (size_t j : poi) {
    t.poi.push_back(static_cast<uint32_t>(j));
    t.mean0.push_back(m.mean(0)[j]);
    t.mean1.push_back(m.mean(1)[j]);
  }
  t.pooled_cov.resize(k * k);
  for (size_t a = 0; a < k; ++a)
    for (size_t b = 0; b < k; ++b)
      t.pooled_cov[a * k + b] = S(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  t.trained_on["rows0"] = std::to_string(m.count(0));
  t.trained_on["rows1"] = std::to_string(m.count(1));
  return t;
}

BitPrediction classify(const TemplateModel& model, std::span<const double> w) {
  const size_t k = model.dim();
  if (k == 0) throw ConfigError("empty template model");
  if (model.poi.back() >= w.size()) throw ConfigError("window does not cover the points of interest");
  // llr = log p1(x) - log p0(x); the shared covariance cancels in the
  // normalisation term.
  double llr = 0;
  if (!model.full_covariance) {
    for (size_t a = 0; a < k; ++a) {
      const double x = w[model.poi[a]];
      const double d0 = x - model.mean0[a], d1 = x - model.mean1[a];
      llr += (d0 * d0 - d1 * d1) / (2 * model.pooled_cov[a]);
    }
  } else {
    const auto K = static_cast<Eigen::Index>(k);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> S(
        model.pooled_cov.data(), K, K);
    Eigen::VectorXd d0(K), d1(K);
    for (Eigen::Index a = 0; a < K; ++a) {
      const double x = w[model.poi[static_cast<size_t>(a)]];
      d0[a] = x - model.mean0[static_cast<size_t>(a)];
      d1[a] = x - model.mean1[static_cast<size_t>(a)];
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(S);
    llr = 0.5 * (d0.dot(llt.solve(d0)) - d1.dot(llt.solve(d1)));
  }
  BitPrediction p;
  p.probability = 1.0 / (1.0 + std::exp(-llr));
  p.cond_guess = llr > 0 ? 1 : 0;
  return p;
}

void write_tcurve_csv(const std::string& path, const TTestResult& t) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "sample,t\n";
  out.precision(10);
  for (size_t i = 0; i < t.t_values.size(); ++i) out << i << ',' << t.t_values[i] << '\n';
}

FeatureMatrix window_features(const LeakageTrace& trace, std::span<const SwapWindow> windows, double f_mod) {
  for (const auto& w : windows)
    if (w.end > trace.samples.size() || w.start >= w.end) throw AlignmentError("swap window outside the trace");
  const std::vector<double> env = demodulate(trace.samples, trace.sample_rate, f_mod, f_mod / 2);
  FeatureMatrix out;
  out.reserve(windows.size());
  for (const auto& w : windows)
    out.emplace_back(env.begin() + static_cast<ptrdiff_t>(w.start), env.begin() + static_cast<ptrdiff_t>(w.end));
  return out;
}

mpz_class NonceBits::value() const {
  mpz_class v = 0;
  if (!bits.empty()) v.set_str(bits, 2);
  return v;
}

size_t NonceBits::matching_lsbs(const mpz_class& k) const {
  const size_t b = bits.size();
  size_t n = 0;
  while (n < b && (bits[b - 1 - n] == '1') == (mpz_tstbit(k.get_mpz_t(), n) != 0)) ++n;
  return n;
}

NonceBits bits_from_conditions(std::span<const BitPrediction> conds, Multiplier m) {
  NonceBits out;
  out.conditions.assign(conds.begin(), conds.end());
  int prev = 0;  // k_b
  double p_prev = 0;
  for (const auto& c : conds) {
    if (m == Multiplier::Ladder) {
      const int bit = c.cond_guess ^ prev;
      // P(k_i = 1) = P(cond) (1 - P(k_{i+1})) + (1 - P(cond)) P(k_{i+1})
      const double p = c.probability * (1 - p_prev) + (1 - c.probability) * p_prev;
      out.bits.push_back(bit ? '1' : '0');
      out.probability.push_back(p);
      prev = bit;
      p_prev = bit ? 1.0 : 0.0;
    } else {
      out.bits.push_back(c.cond_guess ? '1' : '0');
      out.probability.push_back(c.probability);
    }
  }
  return out;
}

NonceBits recover_nonce_bits(const LeakageTrace& trace, const TemplateModel& model,
                             const AlignedSwapWindows& windows, Multiplier m, double f_mod) {
  if (windows.windows.empty()) throw AlignmentError("no swap windows");
  const FeatureMatrix f = window_features(trace, windows.windows, f_mod);
  std::vector<BitPrediction> conds;
  conds.reserve(f.size());
  for (const auto& row : f) conds.push_back(classify(model, row));
  return bits_from_conditions(conds, m);
}

}  // namespace noncelab
