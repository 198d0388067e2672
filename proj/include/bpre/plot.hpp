#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace bpre {

// Each renderer takes the "report" object of a report document.

// log corrected distance vs log n, one series per metric, with the fitted
// line and a "slope = ..." label where a fit exists.
std::string render_rate_plot(const nlohmann::json& clt_report);

// Stored traces of (log Z_k - k mu) / sqrt(k log log k) against log k with
// reference lines at +/- sqrt(2) sigma.
std::string render_lil_plot(const nlohmann::json& lil_report);

// Estimated covariance of (Y_1/4, Y_1/2, Y_1) next to min(s, t), for the
// process and the oracle.
std::string render_covariance_heatmap(const nlohmann::json& invariance_report);

// Dispatches on the document kind. Returns (file stem, svg) pairs; throws
// InvalidArgument for kinds without a plot.
std::vector<std::pair<std::string, std::string>> render_document(const nlohmann::json& document);

}  // namespace bpre
