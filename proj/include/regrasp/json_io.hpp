#pragma once

#include <json.hpp>

#include "regrasp/geometry.hpp"

namespace regrasp {

// Pose fields: "xyz" plus either "rpy" (roll-pitch-yaw, radians) or
// "quat_wxyz". Missing fields default to identity. `where` names the field
// in validation messages.
Transform parse_pose(const nlohmann::json& j, const std::string& where);

// Box fields: "half_extents_m" plus optional pose fields inline.
Box parse_box(const nlohmann::json& j, const std::string& where);

nlohmann::json pose_to_json(const Transform& t);
nlohmann::json box_to_json(const Box& b);

double require_positive(const nlohmann::json& j, const std::string& key, const std::string& where);

}  // namespace regrasp
