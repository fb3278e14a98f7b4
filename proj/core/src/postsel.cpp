#include "spikemix/postsel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>

namespace spikemix {
namespace {

// Labels relabelled by order of first appearance; equal iff same partition.
std::vector<int> canonical_labels(std::span<const int> z) {
  std::map<int, int> relabel;
  std::vector<int> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    auto [it, inserted] = relabel.emplace(z[i], static_cast<int>(relabel.size()));
    out[i] = it->second;
  }
  return out;
}

void check_burn_in(std::size_t n_samples, int burn_in) {
  if (burn_in < 0 || static_cast<std::size_t>(burn_in) >= n_samples)
    throw std::invalid_argument("burn-in must satisfy 0 <= B < number of samples");
}

double sorted_mean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

CooccurrenceMatrix cooccurrence(std::span<const int> z) {
  CooccurrenceMatrix m;
  m.n = static_cast<int>(z.size());
  m.entries.assign(z.size() * z.size(), 0.0);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) m.entries[static_cast<std::size_t>(i) * m.n + j] = z[i] == z[j] ? 1.0 : 0.0;
  return m;
}

CooccurrenceMatrix mean_cooccurrence(std::span<const GibbsSample> samples, int burn_in) {
  check_burn_in(samples.size(), burn_in);
  const auto n = static_cast<int>(samples.front().state.assignments.size());
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n) * n, 0);
  for (std::size_t s = burn_in; s < samples.size(); ++s) {
    const auto& z = samples[s].state.assignments;
    if (static_cast<int>(z.size()) != n) throw std::invalid_argument("trace samples differ in length");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (z[i] == z[j]) ++counts[static_cast<std::size_t>(i) * n + j];
  }
  const double W = static_cast<double>(samples.size() - burn_in);
  CooccurrenceMatrix m;
  m.n = n;
  m.entries.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) m.entries[k] = static_cast<double>(counts[k]) / W;
  return m;
}

CooccurrenceMatrix mean_cooccurrence(const GibbsTrace& trace, int burn_in) {
  return mean_cooccurrence(std::span<const GibbsSample>(trace.samples), burn_in);
}

SelectedClustering select(std::span<const GibbsSample> samples, int burn_in) {
  check_burn_in(samples.size(), burn_in);
  const auto n = static_cast<int>(samples.front().state.assignments.size());
  const auto W = static_cast<std::int64_t>(samples.size() - burn_in);

  // With c = co-occurrence counts, W^2 ||Omega_i - mean||^2 = sum (W omega_i - c)^2,
  // which is exact in integers.
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n) * n, 0);
  for (std::size_t s = burn_in; s < samples.size(); ++s) {
    const auto& z = samples[s].state.assignments;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (z[i] == z[j]) ++counts[static_cast<std::size_t>(i) * n + j];
  }
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  std::size_t best_idx = burn_in;
  for (std::size_t s = burn_in; s < samples.size(); ++s) {
    const auto& z = samples[s].state.assignments;
    std::int64_t d = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const std::int64_t diff = (z[i] == z[j] ? W : 0) - counts[static_cast<std::size_t>(i) * n + j];
        d += diff * diff;
      }
    if (d < best) {
      best = d;
      best_idx = s;
    }
  }

  const auto target = canonical_labels(samples[best_idx].state.assignments);
  std::vector<GibbsState> tied;
  for (std::size_t s = burn_in; s < samples.size(); ++s)
    if (canonical_labels(samples[s].state.assignments) == target) tied.push_back(samples[s].state);

  SelectedClustering out;
  out.assignments = target;
  out.params = align_and_average(tied);
  out.source_index = samples[best_idx].iteration > 0 ? samples[best_idx].iteration
                                                     : static_cast<int>(best_idx) + 1;
  out.tie_count = static_cast<int>(tied.size());
  out.frobenius_distance = std::sqrt(static_cast<double>(best)) / static_cast<double>(W);
  return out;
}

SelectedClustering select(const GibbsTrace& trace, int burn_in) {
  return select(std::span<const GibbsSample>(trace.samples), burn_in);
}

std::vector<ClusterParams> align_and_average(std::span<const GibbsState> samples) {
  if (samples.empty()) throw std::invalid_argument("align_and_average: no samples");
  const auto reference = canonical_labels(samples.front().assignments);
  const int K = reference.empty() ? 0 : *std::max_element(reference.begin(), reference.end()) + 1;
  // first member of each canonical block
  std::vector<int> first_member(K, -1);
  for (std::size_t i = 0; i < reference.size(); ++i)
    if (first_member[reference[i]] < 0) first_member[reference[i]] = static_cast<int>(i);

  std::vector<std::vector<double>> mus(K), log_psis(K);
  for (const auto& s : samples) {
    if (canonical_labels(s.assignments) != reference)
      throw std::invalid_argument("align_and_average: samples have different co-occurrence matrices");
    for (int k = 0; k < K; ++k) {
      const int label = s.assignments[first_member[k]];
      if (label < 0 || label >= s.num_clusters())
        throw std::invalid_argument("align_and_average: label without parameters");
      mus[k].push_back(s.params[label].mu);
      log_psis[k].push_back(s.params[label].log_psi);
    }
  }
  std::vector<ClusterParams> out(K);
  for (int k = 0; k < K; ++k) out[k] = {sorted_mean(mus[k]), sorted_mean(log_psis[k])};
  return out;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: size mismatch");
  const auto ca = canonical_labels(a);
  const auto cb = canonical_labels(b);
  const int ka = ca.empty() ? 0 : *std::max_element(ca.begin(), ca.end()) + 1;
  const int kb = cb.empty() ? 0 : *std::max_element(cb.begin(), cb.end()) + 1;
  std::vector<double> table(static_cast<std::size_t>(ka) * kb, 0.0), ra(ka, 0.0), rb(kb, 0.0);
  for (std::size_t i = 0; i < ca.size(); ++i) {
    table[static_cast<std::size_t>(ca[i]) * kb + cb[i]] += 1.0;
    ra[ca[i]] += 1.0;
    rb[cb[i]] += 1.0;
  }
  auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (double v : table) index += pairs(v);
  for (double v : ra) sum_a += pairs(v);
  for (double v : rb) sum_b += pairs(v);
  const double total = pairs(static_cast<double>(a.size()));
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace spikemix
