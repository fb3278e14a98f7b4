#ifndef SPIKEMIX_POSTSEL_HPP
#define SPIKEMIX_POSTSEL_HPP

#include <span>
#include <vector>

#include "spikemix/dpm.hpp"

namespace spikemix {

// N x N matrix of same-cluster frequencies, row-major.
struct CooccurrenceMatrix {
  int n = 0;
  std::vector<double> entries;

  double operator()(int i, int j) const { return entries[static_cast<std::size_t>(i) * n + j]; }
  bool operator==(const CooccurrenceMatrix&) const = default;
};

CooccurrenceMatrix cooccurrence(std::span<const int> assignments);

// Average over samples burn_in + 1 .. I. Throws std::invalid_argument unless
// 0 <= burn_in < I.
CooccurrenceMatrix mean_cooccurrence(const GibbsTrace& trace, int burn_in);
CooccurrenceMatrix mean_cooccurrence(std::span<const GibbsSample> samples, int burn_in);

struct SelectedClustering {
  std::vector<int> assignments;       // relabelled by first appearance
  std::vector<ClusterParams> params;  // one per cluster of `assignments`
  int source_index = 0;               // 1-based iteration of the selected sample
  int tie_count = 1;                  // post-burn-in samples with the same partition
  double frobenius_distance = 0.0;

  bool operator==(const SelectedClustering&) const = default;
};

// Picks the post-burn-in sample closest in Frobenius norm to the mean
// co-occurrence matrix (earliest on ties) and averages the parameters of
// every post-burn-in sample with the same partition.
SelectedClustering select(const GibbsTrace& trace, int burn_in);
SelectedClustering select(std::span<const GibbsSample> samples, int burn_in);

// Blockwise mean of (mu, log psi) over samples that share one partition,
// ordered by first appearance. Throws std::invalid_argument if the
// partitions differ.
std::vector<ClusterParams> align_and_average(std::span<const GibbsState> samples);

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

}  // namespace spikemix

#endif  // SPIKEMIX_POSTSEL_HPP
