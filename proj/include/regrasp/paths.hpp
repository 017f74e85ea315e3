#pragma once

#include <functional>
#include <vector>

#include "regrasp/geometry.hpp"

namespace regrasp {

/// Point of the composite configuration space: robot configuration plus
/// object pose.
struct CompositeConfig {
    Eigen::VectorXd q;
    Transform object_pose;

    bool approx_equal(const CompositeConfig& other, double tol = 1e-9) const;
};

enum class PathKind { Transit, Transfer };

inline const char* to_string(PathKind k) {
    return k == PathKind::Transit ? "transit" : "transfer";
}

/// Waypoint path within a single mode. Along a transit path the object pose
/// is constant; along a transfer path the gripper-object transform is.
struct SingleModePath {
    PathKind kind = PathKind::Transit;
    std::vector<CompositeConfig> waypoints;

    const CompositeConfig& start() const;
    const CompositeConfig& end() const;
    SingleModePath reversed() const;
};

// Largest object-pose deviation from the first waypoint (transit invariant).
double max_object_pose_deviation(const SingleModePath& path);

// Largest gripper-object transform deviation from the first waypoint
// (transfer invariant); fk maps a robot configuration to the gripper pose.
double max_grasp_deviation(const SingleModePath& path,
                           const std::function<Transform(const Eigen::VectorXd&)>& fk);

/// Composition of single-mode paths. The domain length |M| counts maximal
/// same-kind runs: composing same-kind paths merges them into one unit
/// interval, distinct kinds concatenate. Evaluation runs over [0, |M|].
class ManipulationPath {
public:
    ManipulationPath() = default;
    explicit ManipulationPath(std::vector<SingleModePath> segments);
    explicit ManipulationPath(SingleModePath segment);

    bool empty() const { return segments_.empty(); }
    const std::vector<SingleModePath>& segments() const { return segments_; }

    int domain_length() const;  // |M|
    bool is_irreducible() const;

    // |M| - 1 for an irreducible path; throws NotIrreducibleError otherwise.
    // An empty path has zero transitions.
    int transitions() const;

    const CompositeConfig& start() const;
    const CompositeConfig& end() const;

    // Piecewise evaluation over [0, |M|]: each run owns a unit interval,
    // split evenly among its segments, linear in q (slerp on rotations).
    CompositeConfig evaluate(double s) const;

private:
    std::vector<SingleModePath> segments_;
};

// Composition; only defined when p1 ends where p2 starts
// (EndpointMismatchError otherwise). Associative by construction: the result
// holds the flattened segment sequence.
ManipulationPath compose(const ManipulationPath& p1, const ManipulationPath& p2);
ManipulationPath compose(const SingleModePath& p1, const SingleModePath& p2);

// Merges consecutive same-kind segments until kinds strictly alternate.
// Idempotent; preserves endpoints exactly.
ManipulationPath reduce(const ManipulationPath& path);

}  // namespace regrasp
