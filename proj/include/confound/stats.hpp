#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace confound::stats {

double mean(const std::vector<double>& v);
/// Sample standard deviation, denominator n-1.
double sd(const std::vector<double>& v);

double normal_cdf(double z);
double normal_pdf(double z);

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
double chi2_sf(double x, double df);

/// One-sample Kolmogorov-Smirnov statistic against a fully specified CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Two-sided asymptotic KS p-value with the small-sample correction of
/// Stephens; adequate for the goodness-of-fit screens used here.
double ks_pvalue(double d, std::size_t n);

/// KS statistic of samples against U(0,1); convenience for p-value
/// uniformity checks.
double ks_uniform_statistic(std::vector<double> samples);

/// Chi-square goodness-of-fit p-value for observed counts against expected
/// counts (expected must be positive and of equal length).
double chi2_gof_pvalue(const std::vector<double>& observed, const std::vector<double>& expected);

/// Largest single jump of the empirical CDF (max tie-group mass); a value
/// near zero means the sample looks continuous.
double max_cdf_jump(std::vector<double> samples);

}  // namespace confound::stats
