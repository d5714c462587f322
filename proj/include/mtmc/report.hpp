#pragma once

#include "mtmc/fpslab.hpp"
#include "mtmc/metrics.hpp"

#include <json.hpp>

#include <map>
#include <string>

namespace mtmc {

using Json = nlohmann::ordered_json;
using ClassLabels = std::map<ClassId, std::string>;

/// Raw, unrounded values with a fixed key order.
Json report_json(const MetricsReport& report, const ClassLabels& labels = {});
Json sweep_json(const SweepTable& table, const ClassLabels& labels = {});

/// Rates in percent and durations in seconds, one decimal each.
std::string report_text(const MetricsReport& report, const ClassLabels& labels = {}, bool per_class = false);
std::string sweep_text(const SweepTable& table);

/// Two-space indented dump with a trailing newline.
std::string dump_json(const Json& value);

std::string class_label(ClassId c, const ClassLabels& labels);

}  // namespace mtmc
