#include "isoproj/pairwise.hpp"

#include <algorithm>

#include "isoproj/errors.hpp"
#include "isoproj/parallel.hpp"
#include "isoproj/stats.hpp"

namespace isoproj {

namespace {

constexpr std::size_t kRowBlock = 128;

void check_metric(const EmpiricalMeasure& m, const MetricTag& metric) {
  if (metric.point_dim() != m.dim()) {
    throw ArgumentError("metric " + metric.name() + " does not fit points of dimension " +
                        std::to_string(m.dim()));
  }
}

std::vector<double> powered(const MetricTag& metric, std::span<const double> radii) {
  std::vector<double> out;
  out.reserve(radii.size());
  for (double r : radii) {
    if (!(r > 0)) throw ArgumentError("radii must be positive");
    out.push_back(metric_power(metric, r));
  }
  return out;
}

}  // namespace

kernels::PairMetric pair_metric(const MetricTag& metric) {
  return metric.is_koranyi() ? kernels::PairMetric::Koranyi : kernels::PairMetric::Euclidean;
}

double metric_power(const MetricTag& metric, double r) {
  return metric.is_koranyi() ? (r * r) * (r * r) : r * r;
}

PairCorrelation pair_correlation(const EmpiricalMeasure& measure, const MetricTag& metric,
                                 std::span<const double> radii, unsigned threads) {
  check_metric(measure, metric);
  if (radii.empty()) throw ArgumentError("pair_correlation: empty radius grid");
  const kernels::BinTable bins(powered(metric, radii));
  const kernels::SoaCloud soa = kernels::to_soa(measure);
  const std::size_t n = soa.count;
  const std::size_t blocks = (n + kRowBlock - 1) / kRowBlock;
  const std::size_t nbins = radii.size() + 1;
  std::vector<std::vector<std::uint64_t>> counts(blocks);
  std::vector<std::vector<double>> weights(blocks);
  const kernels::KernelTable& table = kernels::active_kernels();
  const kernels::PairMetric pm = pair_metric(metric);

  parallel_for(blocks, threads, [&](std::size_t blk) {
    std::vector<std::uint64_t> c(bins.bins(), 0);
    std::vector<double> w(bins.bins(), 0.0);
    kernels::PairBlock pb;
    pb.a = pb.b = &soa;
    pb.i_begin = blk * kRowBlock;
    pb.i_end = std::min(n, pb.i_begin + kRowBlock);
    pb.j_begin = pb.i_begin;
    pb.j_end = n;
    pb.upper = true;
    table.histogram(pb, pm, bins, c.data(), w.data());
    counts[blk] = std::move(c);
    weights[blk] = std::move(w);
  });

  PairCorrelation out;
  out.radii.assign(radii.begin(), radii.end());
  out.points_used = n;
  std::vector<std::uint64_t> bin_counts(nbins, 0);
  std::vector<NeumaierSum> bin_weights(nbins);
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    for (std::size_t b = 0; b < nbins; ++b) {
      bin_counts[b] += counts[blk][b];
      bin_weights[b].add(weights[blk][b]);
    }
  }
  std::uint64_t running = 0;
  NeumaierSum running_w;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    running += bin_counts[k];
    running_w.add(bin_weights[k].value());
    out.pair_counts.push_back(running);
    out.pair_weights.push_back(running_w.value());
  }
  out.total_pairs = running + bin_counts[radii.size()];
  running_w.add(bin_weights[radii.size()].value());
  out.total_weight = running_w.value();
  return out;
}

PairCorrelation pair_correlation_rows(const EmpiricalMeasure& measure, const MetricTag& metric,
                                      std::span<const std::size_t> rows,
                                      std::span<const double> radii, unsigned threads) {
  check_metric(measure, metric);
  if (radii.empty()) throw ArgumentError("pair_correlation_rows: empty radius grid");
  const kernels::BinTable bins(powered(metric, radii));
  const kernels::SoaCloud soa = kernels::to_soa(measure);
  std::vector<double> row_pts, row_w;
  NeumaierSum self_weight, row_mass;
  for (std::size_t r : rows) {
    if (r >= measure.size()) throw ArgumentError("pair_correlation_rows: row index out of range");
    const auto p = measure.point(r);
    row_pts.insert(row_pts.end(), p.begin(), p.end());
    row_w.push_back(measure.weight(r));
    self_weight.add(measure.weight(r) * measure.weight(r));
    row_mass.add(measure.weight(r));
  }
  const kernels::SoaCloud rsoa = kernels::to_soa(row_pts, measure.dim(), row_w);
  const std::size_t blocks = (rows.size() + kRowBlock - 1) / kRowBlock;
  const std::size_t nbins = radii.size() + 1;
  std::vector<std::vector<std::uint64_t>> counts(blocks);
  std::vector<std::vector<double>> weights(blocks);
  const kernels::KernelTable& table = kernels::active_kernels();
  const kernels::PairMetric pm = pair_metric(metric);
  parallel_for(blocks, threads, [&](std::size_t blk) {
    std::vector<std::uint64_t> c(bins.bins(), 0);
    std::vector<double> w(bins.bins(), 0.0);
    kernels::PairBlock pb;
    pb.a = &rsoa;
    pb.i_begin = blk * kRowBlock;
    pb.i_end = std::min(rows.size(), pb.i_begin + kRowBlock);
    pb.b = &soa;
    pb.j_begin = 0;
    pb.j_end = soa.count;
    table.histogram(pb, pm, bins, c.data(), w.data());
    counts[blk] = std::move(c);
    weights[blk] = std::move(w);
  });
  std::vector<std::uint64_t> bin_counts(nbins, 0);
  std::vector<NeumaierSum> bin_weights(nbins);
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    for (std::size_t b = 0; b < nbins; ++b) {
      bin_counts[b] += counts[blk][b];
      bin_weights[b].add(weights[blk][b]);
    }
  }
  // Each row met itself at distance 0, which landed in the first bin.
  bin_counts[0] -= rows.size();
  bin_weights[0].add(-self_weight.value());

  PairCorrelation out;
  out.radii.assign(radii.begin(), radii.end());
  out.points_used = measure.size();
  std::uint64_t running = 0;
  NeumaierSum running_w;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    running += bin_counts[k];
    running_w.add(bin_weights[k].value());
    out.pair_counts.push_back(running);
    out.pair_weights.push_back(std::max(0.0, running_w.value()));
  }
  out.total_pairs = running + bin_counts[radii.size()];
  NeumaierSum total;
  total.add(row_mass.value() * measure.total_mass());
  total.add(-self_weight.value());
  out.total_weight = total.value();
  return out;
}

std::vector<double> ball_masses(const EmpiricalMeasure& measure, const MetricTag& metric,
                                std::span<const std::size_t> centers,
                                std::span<const double> radii, unsigned threads) {
  check_metric(measure, metric);
  const kernels::BinTable bins(powered(metric, radii));
  const kernels::SoaCloud soa = kernels::to_soa(measure);
  std::vector<double> centers_pts;
  std::vector<double> unit;
  for (std::size_t c : centers) {
    if (c >= measure.size()) throw ArgumentError("ball_masses: center index out of range");
    const auto p = measure.point(c);
    centers_pts.insert(centers_pts.end(), p.begin(), p.end());
    unit.push_back(1.0);
  }
  const kernels::SoaCloud csoa = kernels::to_soa(centers_pts, measure.dim(), unit);
  const kernels::KernelTable& table = kernels::active_kernels();
  const kernels::PairMetric pm = pair_metric(metric);
  std::vector<double> out(centers.size() * radii.size());
  parallel_for(centers.size(), threads, [&](std::size_t c) {
    std::vector<std::uint64_t> cnt(bins.bins(), 0);
    std::vector<double> w(bins.bins(), 0.0);
    kernels::PairBlock pb;
    pb.a = &csoa;
    pb.i_begin = c;
    pb.i_end = c + 1;
    pb.b = &soa;
    pb.j_begin = 0;
    pb.j_end = soa.count;
    table.histogram(pb, pm, bins, cnt.data(), w.data());
    double running = 0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
      running += w[k];
      out[c * radii.size() + k] = running;
    }
  });
  return out;
}

EnergySum self_energy_sum(const EmpiricalMeasure& measure, const MetricTag& metric, double s,
                          unsigned threads) {
  check_metric(measure, metric);
  const kernels::SoaCloud soa = kernels::to_soa(measure);
  const std::size_t n = soa.count;
  const std::size_t blocks = (n + kRowBlock - 1) / kRowBlock;
  std::vector<kernels::EnergyPartial> parts(blocks);
  const double exponent = s / (metric.is_koranyi() ? 4.0 : 2.0);
  const kernels::KernelTable& table = kernels::active_kernels();
  const kernels::PairMetric pm = pair_metric(metric);
  parallel_for(blocks, threads, [&](std::size_t blk) {
    kernels::PairBlock pb;
    pb.a = pb.b = &soa;
    pb.i_begin = blk * kRowBlock;
    pb.i_end = std::min(n, pb.i_begin + kRowBlock);
    pb.j_begin = pb.i_begin;
    pb.j_end = n;
    pb.upper = true;
    table.energy(pb, pm, exponent, parts[blk]);
  });
  EnergySum out;
  NeumaierSum sum, coincident;
  for (const auto& p : parts) {
    sum.add(p.sum);
    coincident.add(p.coincident_weight);
    out.coincident_pairs += p.coincident;
  }
  out.sum = sum.value();
  out.coincident_weight = coincident.value();
  return out;
}

EnergySum cross_energy_sum(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                           const MetricTag& metric, double s, unsigned threads) {
  check_metric(mu, metric);
  check_metric(nu, metric);
  const kernels::SoaCloud a = kernels::to_soa(mu);
  const kernels::SoaCloud b = kernels::to_soa(nu);
  const std::size_t blocks = (a.count + kRowBlock - 1) / kRowBlock;
  std::vector<kernels::EnergyPartial> parts(blocks);
  const double exponent = s / (metric.is_koranyi() ? 4.0 : 2.0);
  const kernels::KernelTable& table = kernels::active_kernels();
  const kernels::PairMetric pm = pair_metric(metric);
  parallel_for(blocks, threads, [&](std::size_t blk) {
    kernels::PairBlock pb;
    pb.a = &a;
    pb.i_begin = blk * kRowBlock;
    pb.i_end = std::min(a.count, pb.i_begin + kRowBlock);
    pb.b = &b;
    pb.j_begin = 0;
    pb.j_end = b.count;
    table.energy(pb, pm, exponent, parts[blk]);
  });
  EnergySum out;
  NeumaierSum sum, coincident;
  for (const auto& p : parts) {
    sum.add(p.sum);
    coincident.add(p.coincident_weight);
    out.coincident_pairs += p.coincident;
  }
  out.sum = sum.value();
  out.coincident_weight = coincident.value();
  return out;
}

}  // namespace isoproj
