#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace triadkit::trust {

struct Listing {
  std::string cluster_id;
  std::string seller;
  std::string item_id;
  double price = 0.0;
};

using RatingTable = std::unordered_map<std::string, double>;  // seller -> percent

/// clusters.csv: cluster_id,seller,item_id,price (extra columns ignored).
std::vector<Listing> load_listings(const std::filesystem::path& path);
/// ratings.csv: seller,rating_percent.
RatingTable load_ratings(const std::filesystem::path& path);

struct DeviationPoint {
  double rating = 0.0;     // percent
  double deviation = 0.0;  // percent from cluster median
  double weight = 1.0;     // items behind the point
  std::string seller;      // empty for bucketed points
  std::string cluster_id;  // per-item points only
  std::string item_id;     // per-item points only
};

struct DeviationSet {
  std::vector<DeviationPoint> points;
  std::size_t skipped_missing_rating = 0;
  std::size_t dropped_singleton_clusters = 0;
};

double median(std::vector<double> values);

/// One point per item against its cluster median. Clusters with a single
/// listing are dropped; items whose seller has no rating are skipped.
/// Output follows input listing order.
DeviationSet price_deviations(const std::vector<Listing>& listings, const RatingTable& ratings);

/// Mean per-item deviation per seller, for sellers with >= min_items items.
/// Sorted by seller id.
std::vector<DeviationPoint> seller_deviation_profile(const std::vector<Listing>& listings,
                                                     const RatingTable& ratings,
                                                     std::size_t min_items = 15);

/// 0.1-point bins over [90, 100] and 1-point bins below 90. Each bucket
/// becomes one point at the weighted mean rating and deviation.
std::vector<DeviationPoint> bucket_by_rating(const std::vector<DeviationPoint>& points);

struct FitOptions {
  double b_min = 1.0;
  double b_max = 400.0;
  int grid_steps = 200;  // log-spaced, endpoints included
  bool refine = true;    // golden-section on log b around the best grid point
};

struct PowerFit {
  double a = 0.0, b = 1.0, c = 0.0;
  double r_squared = 0.0;
  std::optional<double> zero_crossing;  // rating in (0, 100] with d = 0
  double median_rating = 0.0;
  // b*a*x / (a*x + c + 100) with x = (r/100)^b at the median rating: the
  // percentage price change per percentage rating change.
  double elasticity = 0.0;
  double slope_at_median = 0.0;  // dd/dr in deviation points per rating point
};

/// Weighted least squares for d(r) = a*(r/100)^b + c. Throws
/// std::invalid_argument with fewer than 3 distinct ratings.
PowerFit fit_power(const std::vector<DeviationPoint>& points, const FitOptions& options = {});

}  // namespace triadkit::trust
