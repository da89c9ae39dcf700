#include "triadkit/trust.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "triadkit/csv.hpp"
#include "triadkit/types.hpp"

namespace triadkit::trust {

std::vector<Listing> load_listings(const std::filesystem::path& path) {
  csv::Reader reader(path, {"cluster_id", "seller", "item_id", "price"});
  std::vector<Listing> out;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() < 4) throw ValidationError("expected 4 columns", reader.line());
    Listing l{f[0], f[1], f[2], csv::parse_double(f[3], reader.line(), "price")};
    if (!(l.price > 0)) throw ValidationError("price must be > 0", reader.line());
    out.push_back(std::move(l));
  }
  return out;
}

RatingTable load_ratings(const std::filesystem::path& path) {
  csv::Reader reader(path, {"seller", "rating_percent"});
  RatingTable out;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() < 2) throw ValidationError("expected 2 columns", reader.line());
    const double r = csv::parse_double(f[1], reader.line(), "rating_percent");
    if (!(r >= 0 && r <= 100)) throw ValidationError("rating outside [0,100]", reader.line());
    out[f[0]] = r;
  }
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

DeviationSet price_deviations(const std::vector<Listing>& listings, const RatingTable& ratings) {
  std::unordered_map<std::string, std::vector<double>> prices;
  for (const auto& l : listings) prices[l.cluster_id].push_back(l.price);
  std::unordered_map<std::string, double> medians;
  DeviationSet out;
  for (auto& [id, p] : prices) {
    if (p.size() < 2) {
      ++out.dropped_singleton_clusters;
      continue;
    }
    medians[id] = median(std::move(p));
  }
  for (const auto& l : listings) {
    auto m = medians.find(l.cluster_id);
    if (m == medians.end()) continue;
    auto r = ratings.find(l.seller);
    if (r == ratings.end()) {
      ++out.skipped_missing_rating;
      continue;
    }
    out.points.push_back(
        {r->second, 100.0 * (l.price - m->second) / m->second, 1.0, l.seller, l.cluster_id, l.item_id});
  }
  return out;
}

std::vector<DeviationPoint> seller_deviation_profile(const std::vector<Listing>& listings,
                                                     const RatingTable& ratings,
                                                     std::size_t min_items) {
  const auto items = price_deviations(listings, ratings);
  struct Acc {
    double sum = 0.0;
    std::size_t n = 0;
    double rating = 0.0;
  };
  std::map<std::string, Acc> by_seller;
  for (const auto& p : items.points) {
    auto& a = by_seller[p.seller];
    a.sum += p.deviation;
    ++a.n;
    a.rating = p.rating;
  }
  std::vector<DeviationPoint> out;
  for (const auto& [seller, a] : by_seller) {
    if (a.n < min_items) continue;
    out.push_back({a.rating, a.sum / static_cast<double>(a.n), static_cast<double>(a.n), seller, {}, {}});
  }
  return out;
}

namespace {

// Bins keyed by tenths of a point: exact for ratings given to 0.1.
long rating_bin(double r) {
  const long tenths = static_cast<long>(std::floor(r * 10.0 + 1e-9));
  if (tenths >= 900) return std::min(tenths, 999L);
  return static_cast<long>(std::floor(r)) * 10;
}

}  // namespace

std::vector<DeviationPoint> bucket_by_rating(const std::vector<DeviationPoint>& points) {
  struct Acc {
    double w = 0.0, wr = 0.0, wd = 0.0;
  };
  std::map<long, Acc> bins;
  for (const auto& p : points) {
    auto& a = bins[rating_bin(p.rating)];
    a.w += p.weight;
    a.wr += p.weight * p.rating;
    a.wd += p.weight * p.deviation;
  }
  std::vector<DeviationPoint> out;
  for (const auto& [bin, a] : bins) {
    if (a.w <= 0) continue;
    DeviationPoint p;
    p.rating = a.wr / a.w;
    p.deviation = a.wd / a.w;
    p.weight = a.w;
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

struct LinearFit {
  double a = 0.0, c = 0.0, sse = 0.0;
};

// Weighted regression of d on x = (r/100)^b.
LinearFit solve_at(const std::vector<DeviationPoint>& pts, double b) {
  double sw = 0, sx = 0, sd = 0;
  std::vector<double> xs(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    xs[i] = std::pow(pts[i].rating / 100.0, b);
    sw += pts[i].weight;
    sx += pts[i].weight * xs[i];
    sd += pts[i].weight * pts[i].deviation;
  }
  const double mx = sx / sw, md = sd / sw;
  double sxx = 0, sxd = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double dx = xs[i] - mx;
    sxx += pts[i].weight * dx * dx;
    sxd += pts[i].weight * dx * (pts[i].deviation - md);
  }
  LinearFit f;
  f.a = sxx > 0 ? sxd / sxx : 0.0;
  f.c = md - f.a * mx;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double r = pts[i].deviation - (f.a * xs[i] + f.c);
    f.sse += pts[i].weight * r * r;
  }
  return f;
}

double weighted_median_rating(std::vector<DeviationPoint> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const DeviationPoint& x, const DeviationPoint& y) { return x.rating < y.rating; });
  double total = 0;
  for (const auto& p : pts) total += p.weight;
  double acc = 0;
  for (const auto& p : pts) {
    acc += p.weight;
    if (acc >= 0.5 * total) return p.rating;
  }
  return pts.back().rating;
}

}  // namespace

PowerFit fit_power(const std::vector<DeviationPoint>& points, const FitOptions& options) {
  {
    std::vector<double> r;
    for (const auto& p : points)
      if (p.weight > 0) r.push_back(p.rating);
    std::sort(r.begin(), r.end());
    if (std::unique(r.begin(), r.end()) - r.begin() < 3)
      throw std::invalid_argument("power fit needs at least 3 distinct ratings");
  }
  if (options.grid_steps < 2 || !(options.b_min > 0) || !(options.b_max > options.b_min))
    throw std::invalid_argument("invalid fit grid");

  const double lo = std::log(options.b_min), hi = std::log(options.b_max);
  const double step = (hi - lo) / (options.grid_steps - 1);
  double best_b = options.b_min;
  LinearFit best = solve_at(points, best_b);
  int best_k = 0;
  for (int k = 1; k < options.grid_steps; ++k) {
    const double b = std::exp(lo + step * k);
    const auto f = solve_at(points, b);
    if (f.sse < best.sse) {
      best = f;
      best_b = b;
      best_k = k;
    }
  }

  if (options.refine) {
    // Golden-section search on log b within the neighbouring grid cells.
    double x0 = lo + step * std::max(0, best_k - 1);
    double x1 = lo + step * std::min(options.grid_steps - 1, best_k + 1);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = x1 - phi * (x1 - x0), b = x0 + phi * (x1 - x0);
    double fa = solve_at(points, std::exp(a)).sse, fb = solve_at(points, std::exp(b)).sse;
    for (int it = 0; it < 80; ++it) {
      if (fa < fb) {
        x1 = b;
        b = a;
        fb = fa;
        a = x1 - phi * (x1 - x0);
        fa = solve_at(points, std::exp(a)).sse;
      } else {
        x0 = a;
        a = b;
        fa = fb;
        b = x0 + phi * (x1 - x0);
        fb = solve_at(points, std::exp(b)).sse;
      }
    }
    const double cand_b = std::exp(0.5 * (x0 + x1));
    const auto cand = solve_at(points, cand_b);
    if (cand.sse < best.sse) {
      best = cand;
      best_b = cand_b;
    }
  }

  PowerFit fit;
  fit.a = best.a;
  fit.b = best_b;
  fit.c = best.c;
  double sw = 0, sd = 0;
  for (const auto& p : points) {
    sw += p.weight;
    sd += p.weight * p.deviation;
  }
  const double md = sd / sw;
  double sst = 0;
  for (const auto& p : points) sst += p.weight * (p.deviation - md) * (p.deviation - md);
  fit.r_squared = sst > 0 ? 1.0 - best.sse / sst : (best.sse == 0 ? 1.0 : 0.0);

  if (fit.a != 0) {
    const double ratio = -fit.c / fit.a;
    if (ratio > 0) {
      const double r0 = 100.0 * std::pow(ratio, 1.0 / fit.b);
      if (r0 > 0 && r0 <= 100) fit.zero_crossing = r0;
    }
  }
  fit.median_rating = weighted_median_rating(points);
  const double x = std::pow(fit.median_rating / 100.0, fit.b);
  const double denom = fit.a * x + fit.c + 100.0;
  fit.elasticity = denom != 0 ? fit.b * fit.a * x / denom : 0.0;
  fit.slope_at_median = fit.median_rating > 0 ? fit.a * fit.b * x / fit.median_rating : 0.0;
  return fit;
}

}  // namespace triadkit::trust
