#pragma once

#include <string>
#include <vector>

#include "regrasp/object_gripper.hpp"
#include "regrasp/paths.hpp"

namespace regrasp {

/// One revolute joint: fixed origin transform from the parent frame, rotation
/// axis in the joint frame, collision box attached to the rotated frame.
struct JointSpec {
    Transform origin;
    Vec3 axis = Vec3::UnitZ();
    Box link_box;
    double lower = -M_PI;
    double upper = M_PI;
};

/// Serial revolute-joint manipulator with one collision box per link.
struct RobotModel {
    std::string name;
    Transform base;
    std::vector<JointSpec> joints;
    Transform tool;  // flange -> gripper frame (TCP between the fingertips)

    int dof() const { return static_cast<int>(joints.size()); }
    Eigen::VectorXd home() const { return Eigen::VectorXd::Zero(dof()); }
    void check_limits(const Eigen::VectorXd& q) const;  // throws JointLimitError
    Eigen::VectorXd clamp_to_limits(const Eigen::VectorXd& q) const;
    Eigen::VectorXd sample_configuration(Rng& rng) const;
};

// Loads a robot description (joint axes, origins, limits, link boxes, tool
// frame); link boxes are inflated by the file's collision_inflation_m.
RobotModel load_robot_json(const std::string& path);
RobotModel parse_robot_json(const std::string& text, const std::string& where);

// World pose of each joint frame after its rotation, then the tool frame last
// (size dof + 1).
std::vector<Transform> fk_frames(const RobotModel& robot, const Eigen::VectorXd& q);

// Tool (gripper) frame pose.
Transform fk(const RobotModel& robot, const Eigen::VectorXd& q);

// Geometric Jacobian of the tool frame: rows 0-2 linear, rows 3-5 angular.
Eigen::Matrix<double, 6, Eigen::Dynamic> jacobian(const RobotModel& robot,
                                                  const Eigen::VectorXd& q);

struct IkOptions {
    int max_iterations = 300;       // per seed
    double damping = 1e-2;          // DLS lambda
    double step_clamp = 0.2;        // rad per joint per iteration
    double position_tol = 1e-5;     // convergence thresholds, tighter than the
    double orientation_tol = 1e-4;  // 1e-4 m / 1e-3 rad contract
};

// Damped-least-squares IK from `seeds` starting points (the optional bias
// first, then random in-limit configurations). Every returned configuration
// reproduces the target within the contract tolerances; an empty result means
// no solution was found within budget.
std::vector<Eigen::VectorXd> ik(const RobotModel& robot, const Transform& target, int seeds,
                                Rng& rng, const Eigen::VectorXd* bias = nullptr,
                                const IkOptions& options = {});

/// The planner's world: robot + gripper, the table, static obstacles, and the
/// movable object.
struct WorldModel {
    RobotModel robot;
    GripperModel gripper;
    ObjectModel object;
    Box table;
    std::vector<Box> obstacles;

    double table_top() const { return table_top_z(table); }
};

// Mode-aware collision check. Transit treats the object at its pose as an
// obstacle; transfer attaches the object to the gripper and ignores
// gripper-object contact. `opening` sets the finger separation used for the
// gripper collision boxes; negative means fully open.
bool collision_free(const WorldModel& world, const CompositeConfig& config, PathKind mode,
                    double opening = -1.0);

}  // namespace regrasp
