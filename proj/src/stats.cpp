#include "stats.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace nlm {

namespace {

double u_statistic(const std::vector<double>& a, const std::vector<double>& b) {
    double u = 0.0;
    for (double x : a)
        for (double y : b) {
            if (x > y)
                u += 1.0;
            else if (x == y)
                u += 0.5;
        }
    return u;
}

void count_assignments(const std::vector<double>& pooled, std::vector<std::size_t>& pick,
                       std::size_t next, std::size_t n1, double threshold, double center,
                       std::uint64_t* total, std::uint64_t* extreme) {
    if (pick.size() == n1) {
        std::vector<double> ga, gb;
        std::size_t pi = 0;
        for (std::size_t i = 0; i < pooled.size(); ++i) {
            if (pi < pick.size() && pick[pi] == i) {
                ga.push_back(pooled[i]);
                ++pi;
            } else {
                gb.push_back(pooled[i]);
            }
        }
        ++*total;
        if (std::abs(u_statistic(ga, gb) - center) >= threshold - 1e-12) ++*extreme;
        return;
    }
    const std::size_t remaining = n1 - pick.size();
    for (std::size_t i = next; i + remaining <= pooled.size(); ++i) {
        pick.push_back(i);
        count_assignments(pooled, pick, i + 1, n1, threshold, center, total, extreme);
        pick.pop_back();
    }
}

}  // namespace

TestResult wilcoxon_rank_sum(const SampleGroup& a, const SampleGroup& b) {
    if (a.values.empty() || b.values.empty()) throw DomainError("wilcoxon: empty group");
    const std::size_t n1 = a.values.size();
    const std::size_t n2 = b.values.size();
    if (n1 + n2 > 20) throw DomainError("wilcoxon: exact enumeration limited to n1+n2 <= 20");

    TestResult r;
    r.u = u_statistic(a.values, b.values);
    const double center = static_cast<double>(n1 * n2) / 2.0;
    const double dev = std::abs(r.u - center);

    std::vector<double> pooled = a.values;
    pooled.insert(pooled.end(), b.values.begin(), b.values.end());

    std::uint64_t total = 0, extreme = 0;
    std::vector<std::size_t> pick;
    count_assignments(pooled, pick, 0, n1, dev, center, &total, &extreme);
    r.p = static_cast<double>(extreme) / static_cast<double>(total);
    r.significant = r.p < 0.05;
    r.hl_estimate = hodges_lehmann(a, b);
    return r;
}

double hodges_lehmann(const SampleGroup& a, const SampleGroup& b) {
    if (a.values.empty() || b.values.empty()) throw DomainError("hodges_lehmann: empty group");
    std::vector<double> diffs;
    diffs.reserve(a.values.size() * b.values.size());
    for (double x : a.values)
        for (double y : b.values) diffs.push_back(x - y);
    std::sort(diffs.begin(), diffs.end());
    const std::size_t n = diffs.size();
    if (n % 2 == 1) return diffs[n / 2];
    return 0.5 * (diffs[n / 2 - 1] + diffs[n / 2]);
}

}  // namespace nlm
