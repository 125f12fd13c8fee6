#pragma once

#include <string>
#include <vector>

namespace nlm {

struct SampleGroup {
    std::string label;
    std::vector<double> values;
};

struct TestResult {
    double u = 0.0;       // Mann-Whitney U for the first group
    double p = 1.0;       // exact two-sided p
    bool significant = false;  // p < 0.05
    double hl_estimate = 0.0;
};

// Exact two-sided Mann-Whitney: enumerates every C(n1+n2, n1) assignment of
// the pooled values to the first group and counts assignments whose U
// deviates from n1*n2/2 at least as much as the observed one. Ties score
// 0.5 per equal pair. Group sizes are capped at n1+n2 <= 20.
TestResult wilcoxon_rank_sum(const SampleGroup& a, const SampleGroup& b);

// Median of all n1*n2 pairwise differences a_i - b_j; even counts use the
// midpoint of the central order statistics.
double hodges_lehmann(const SampleGroup& a, const SampleGroup& b);

}  // namespace nlm
