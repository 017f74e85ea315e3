#include "regrasp/kinematics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "regrasp/json_io.hpp"

namespace regrasp {

using nlohmann::json;

Transform parse_pose(const json& j, const std::string& where) {
    Vec3 t = Vec3::Zero();
    if (j.contains("xyz")) {
        const auto& a = j.at("xyz");
        if (!a.is_array() || a.size() != 3) throw ValidationError(where + ".xyz: expected 3 numbers");
        t = Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
    }
    Quat q = Quat::Identity();
    if (j.contains("quat_wxyz")) {
        const auto& a = j.at("quat_wxyz");
        if (!a.is_array() || a.size() != 4) {
            throw ValidationError(where + ".quat_wxyz: expected 4 numbers");
        }
        q = Quat(a[0].get<double>(), a[1].get<double>(), a[2].get<double>(), a[3].get<double>());
        if (std::abs(q.norm() - 1.0) > 1e-3) {
            throw ValidationError(where + ".quat_wxyz: not a unit quaternion");
        }
    } else if (j.contains("rpy")) {
        const auto& a = j.at("rpy");
        if (!a.is_array() || a.size() != 3) throw ValidationError(where + ".rpy: expected 3 numbers");
        q = Eigen::AngleAxisd(a[2].get<double>(), Vec3::UnitZ()) *
            Eigen::AngleAxisd(a[1].get<double>(), Vec3::UnitY()) *
            Eigen::AngleAxisd(a[0].get<double>(), Vec3::UnitX());
    }
    return Transform(q, t);
}

Box parse_box(const json& j, const std::string& where) {
    if (!j.contains("half_extents_m")) {
        throw ValidationError(where + ".half_extents_m: missing");
    }
    const auto& a = j.at("half_extents_m");
    if (!a.is_array() || a.size() != 3) {
        throw ValidationError(where + ".half_extents_m: expected 3 numbers");
    }
    const Vec3 half(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
    if (!(half.x() > 0 && half.y() > 0 && half.z() > 0)) {
        throw ValidationError(where + ".half_extents_m: must be strictly positive");
    }
    return Box(half, parse_pose(j, where));
}

json pose_to_json(const Transform& t) {
    return json{{"xyz", {t.translation.x(), t.translation.y(), t.translation.z()}},
                {"quat_wxyz",
                 {t.rotation.w(), t.rotation.x(), t.rotation.y(), t.rotation.z()}}};
}

json box_to_json(const Box& b) {
    json j = pose_to_json(b.local_pose);
    j["half_extents_m"] = {b.half_extents.x(), b.half_extents.y(), b.half_extents.z()};
    return j;
}

double require_positive(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ValidationError(where + "." + key + ": missing");
    const double v = j.at(key).get<double>();
    if (!(v > 0.0)) throw ValidationError(where + "." + key + ": must be positive");
    return v;
}

void RobotModel::check_limits(const Eigen::VectorXd& q) const {
    if (q.size() != dof()) throw DimensionMismatchError("configuration size != robot dof");
    for (int i = 0; i < dof(); ++i) {
        if (q[i] < joints[static_cast<std::size_t>(i)].lower - 1e-9 ||
            q[i] > joints[static_cast<std::size_t>(i)].upper + 1e-9) {
            throw JointLimitError("joint " + std::to_string(i + 1) + " outside its limits");
        }
    }
}

Eigen::VectorXd RobotModel::clamp_to_limits(const Eigen::VectorXd& q) const {
    Eigen::VectorXd out = q;
    for (int i = 0; i < dof(); ++i) {
        out[i] = std::clamp(out[i], joints[static_cast<std::size_t>(i)].lower,
                            joints[static_cast<std::size_t>(i)].upper);
    }
    return out;
}

Eigen::VectorXd RobotModel::sample_configuration(Rng& rng) const {
    Eigen::VectorXd q(dof());
    for (int i = 0; i < dof(); ++i) {
        std::uniform_real_distribution<double> dist(joints[static_cast<std::size_t>(i)].lower,
                                                    joints[static_cast<std::size_t>(i)].upper);
        q[i] = dist(rng);
    }
    return q;
}

RobotModel parse_robot_json(const std::string& text, const std::string& where) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(where + ": " + e.what());
    }
    RobotModel robot;
    robot.name = doc.value("name", "robot");
    const double inflation = doc.value("collision_inflation_m", 0.0);
    if (doc.contains("base_pose")) robot.base = parse_pose(doc["base_pose"], where + ".base_pose");
    if (!doc.contains("tool")) throw ValidationError(where + ".tool: missing");
    robot.tool = parse_pose(doc["tool"], where + ".tool");
    if (!doc.contains("joints") || !doc["joints"].is_array() || doc["joints"].empty()) {
        throw ValidationError(where + ".joints: missing or empty");
    }
    int idx = 0;
    for (const json& jj : doc["joints"]) {
        const std::string lbl = where + ".joints[" + std::to_string(idx++) + "]";
        JointSpec spec;
        spec.origin = parse_pose(jj.value("origin", json::object()), lbl + ".origin");
        const auto& a = jj.at("axis");
        spec.axis = Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
        if (spec.axis.norm() < 1e-9) throw ValidationError(lbl + ".axis: zero vector");
        spec.axis.normalize();
        spec.lower = jj.at("lower_rad").get<double>();
        spec.upper = jj.at("upper_rad").get<double>();
        if (!(spec.lower < spec.upper)) throw ValidationError(lbl + ": lower_rad must be < upper_rad");
        spec.link_box = parse_box(jj.at("link_box"), lbl + ".link_box");
        spec.link_box.half_extents.array() += inflation;
        robot.joints.push_back(spec);
    }
    return robot;
}

RobotModel load_robot_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open robot file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_robot_json(buf.str(), path);
}

std::vector<Transform> fk_frames(const RobotModel& robot, const Eigen::VectorXd& q) {
    robot.check_limits(q);
    std::vector<Transform> frames;
    frames.reserve(robot.joints.size() + 1);
    Transform current = robot.base;
    for (int i = 0; i < robot.dof(); ++i) {
        const JointSpec& joint = robot.joints[static_cast<std::size_t>(i)];
        current = current * joint.origin * Transform::from_axis_angle(joint.axis, q[i]);
        frames.push_back(current);
    }
    frames.push_back(current * robot.tool);
    return frames;
}

Transform fk(const RobotModel& robot, const Eigen::VectorXd& q) {
    return fk_frames(robot, q).back();
}

Eigen::Matrix<double, 6, Eigen::Dynamic> jacobian(const RobotModel& robot,
                                                  const Eigen::VectorXd& q) {
    const std::vector<Transform> frames = fk_frames(robot, q);
    const Vec3 p_tool = frames.back().translation;
    Eigen::Matrix<double, 6, Eigen::Dynamic> jac(6, robot.dof());
    for (int i = 0; i < robot.dof(); ++i) {
        const Transform& frame = frames[static_cast<std::size_t>(i)];
        const Vec3 axis_w = frame.rotation * robot.joints[static_cast<std::size_t>(i)].axis;
        jac.col(i).head<3>() = axis_w.cross(p_tool - frame.translation);
        jac.col(i).tail<3>() = axis_w;
    }
    return jac;
}

namespace {

// Error twist taking `current` to `target`: [translation; rotation vector].
Eigen::Matrix<double, 6, 1> pose_error(const Transform& current, const Transform& target) {
    Eigen::Matrix<double, 6, 1> e;
    e.head<3>() = target.translation - current.translation;
    const Quat dq = (target.rotation * current.rotation.conjugate()).normalized();
    Eigen::AngleAxisd aa(dq);
    double angle = aa.angle();
    Vec3 axis = aa.axis();
    if (angle > M_PI) {  // take the short way
        angle = 2.0 * M_PI - angle;
        axis = -axis;
    }
    e.tail<3>() = axis * angle;
    return e;
}

}  // namespace

std::vector<Eigen::VectorXd> ik(const RobotModel& robot, const Transform& target, int seeds,
                                Rng& rng, const Eigen::VectorXd* bias, const IkOptions& options) {
    if (seeds < 1) throw OutOfRangeError("ik: seeds must be >= 1");
    std::vector<Eigen::VectorXd> solutions;

    for (int s = 0; s < seeds; ++s) {
        Eigen::VectorXd q;
        if (s == 0 && bias != nullptr) {
            q = robot.clamp_to_limits(*bias);
        } else {
            q = robot.sample_configuration(rng);
        }

        bool converged = false;
        for (int it = 0; it < options.max_iterations; ++it) {
            const Transform current = fk(robot, q);
            const Eigen::Matrix<double, 6, 1> err = pose_error(current, target);
            if (err.head<3>().norm() < options.position_tol &&
                err.tail<3>().norm() < options.orientation_tol) {
                converged = true;
                break;
            }
            const auto jac = jacobian(robot, q);
            const Eigen::Matrix<double, 6, 6> gram =
                jac * jac.transpose() +
                options.damping * options.damping * Eigen::Matrix<double, 6, 6>::Identity();
            Eigen::VectorXd dq = jac.transpose() * gram.ldlt().solve(err);
            const double biggest = dq.lpNorm<Eigen::Infinity>();
            if (biggest > options.step_clamp) dq *= options.step_clamp / biggest;
            q = robot.clamp_to_limits(q + dq);
        }
        if (!converged) continue;

        // Contract recheck before returning.
        const Eigen::Matrix<double, 6, 1> err = pose_error(fk(robot, q), target);
        if (err.head<3>().norm() > 1e-4 || err.tail<3>().norm() > 1e-3) continue;

        bool duplicate = false;
        for (const Eigen::VectorXd& other : solutions) {
            if ((other - q).lpNorm<Eigen::Infinity>() < 1e-3) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) solutions.push_back(q);
    }
    return solutions;
}

namespace {

struct BodyBox {
    Box box;
    Transform pose;   // world pose of the box's parent frame
    int link = -1;    // joint index, -1 for non-robot bodies
    bool gripper = false;
};

}  // namespace

bool collision_free(const WorldModel& world, const CompositeConfig& config, PathKind mode,
                    double opening) {
    std::vector<Transform> frames;
    try {
        frames = fk_frames(world.robot, config.q);
    } catch (const JointLimitError&) {
        return false;
    }

    const double open = opening < 0.0 ? world.gripper.max_opening : opening;
    std::vector<BodyBox> robot_bodies;
    for (int i = 0; i < world.robot.dof(); ++i) {
        robot_bodies.push_back({world.robot.joints[static_cast<std::size_t>(i)].link_box,
                                frames[static_cast<std::size_t>(i)], i, false});
    }
    const Transform& grip = frames.back();
    for (const Box& part : world.gripper.body_boxes(open)) {
        robot_bodies.push_back({part, grip, world.robot.dof(), true});
    }

    // Robot self-collision between non-adjacent links (the gripper counts as
    // one link past the last joint).
    for (std::size_t a = 0; a < robot_bodies.size(); ++a) {
        for (std::size_t b = a + 1; b < robot_bodies.size(); ++b) {
            if (std::abs(robot_bodies[a].link - robot_bodies[b].link) <= 1) continue;
            if (obb_overlap(robot_bodies[a].box, robot_bodies[a].pose, robot_bodies[b].box,
                            robot_bodies[b].pose)) {
                return false;
            }
        }
    }

    // Robot vs table and static obstacles.
    const Transform eye = Transform::identity();
    for (const BodyBox& body : robot_bodies) {
        if (obb_overlap(body.box, body.pose, world.table, eye)) return false;
        for (const Box& obs : world.obstacles) {
            if (obb_overlap(body.box, body.pose, obs, eye)) return false;
        }
    }

    // Robot vs object: in transfer the gripper holds it, so finger/palm
    // contact is expected and skipped.
    for (const BodyBox& body : robot_bodies) {
        if (mode == PathKind::Transfer && body.gripper) continue;
        for (const Box& part : world.object.boxes) {
            if (obb_overlap(body.box, body.pose, part, config.object_pose)) return false;
        }
    }

    // Carried object vs the environment.
    if (mode == PathKind::Transfer) {
        for (const Box& part : world.object.boxes) {
            if (obb_overlap(part, config.object_pose, world.table, eye)) return false;
            for (const Box& obs : world.obstacles) {
                if (obb_overlap(part, config.object_pose, obs, eye)) return false;
            }
        }
    }
    return true;
}

}  // namespace regrasp
