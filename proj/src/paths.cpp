#include "regrasp/paths.hpp"

#include <algorithm>
#include <cmath>

namespace regrasp {

bool CompositeConfig::approx_equal(const CompositeConfig& other, double tol) const {
    if (q.size() != other.q.size()) return false;
    return (q - other.q).lpNorm<Eigen::Infinity>() <= tol && object_pose.approx_equal(other.object_pose, tol);
}

const CompositeConfig& SingleModePath::start() const {
    if (waypoints.empty()) throw ValidationError("single-mode path has no waypoints");
    return waypoints.front();
}

const CompositeConfig& SingleModePath::end() const {
    if (waypoints.empty()) throw ValidationError("single-mode path has no waypoints");
    return waypoints.back();
}

SingleModePath SingleModePath::reversed() const {
    SingleModePath out{kind, waypoints};
    std::reverse(out.waypoints.begin(), out.waypoints.end());
    return out;
}

double max_object_pose_deviation(const SingleModePath& path) {
    if (path.waypoints.empty()) return 0.0;
    const Transform& ref = path.waypoints.front().object_pose;
    double dev = 0.0;
    for (const CompositeConfig& w : path.waypoints) {
        dev = std::max(dev, (w.object_pose.translation - ref.translation).norm());
        dev = std::max(dev, rotation_distance(w.object_pose.rotation, ref.rotation));
    }
    return dev;
}

double max_grasp_deviation(const SingleModePath& path,
                           const std::function<Transform(const Eigen::VectorXd&)>& fk) {
    if (path.waypoints.empty()) return 0.0;
    const Transform ref = fk(path.waypoints.front().q).inverse() * path.waypoints.front().object_pose;
    double dev = 0.0;
    for (const CompositeConfig& w : path.waypoints) {
        const Transform grasp = fk(w.q).inverse() * w.object_pose;
        dev = std::max(dev, (grasp.translation - ref.translation).norm());
        dev = std::max(dev, rotation_distance(grasp.rotation, ref.rotation));
    }
    return dev;
}

ManipulationPath::ManipulationPath(std::vector<SingleModePath> segments)
    : segments_(std::move(segments)) {
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (segments_[i].waypoints.empty()) {
            throw ValidationError("manipulation path: empty segment");
        }
        if (i > 0 && !segments_[i - 1].end().approx_equal(segments_[i].start())) {
            throw EndpointMismatchError("manipulation path: segment endpoints do not chain");
        }
    }
}

ManipulationPath::ManipulationPath(SingleModePath segment) {
    if (segment.waypoints.empty()) throw ValidationError("manipulation path: empty segment");
    segments_.push_back(std::move(segment));
}

int ManipulationPath::domain_length() const {
    int runs = 0;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (i == 0 || segments_[i].kind != segments_[i - 1].kind) ++runs;
    }
    return runs;
}

bool ManipulationPath::is_irreducible() const {
    for (std::size_t i = 1; i < segments_.size(); ++i) {
        if (segments_[i].kind == segments_[i - 1].kind) return false;
    }
    return true;
}

int ManipulationPath::transitions() const {
    if (segments_.empty()) return 0;
    if (!is_irreducible()) {
        throw NotIrreducibleError("transitions: path has consecutive same-type segments");
    }
    return static_cast<int>(segments_.size()) - 1;
}

const CompositeConfig& ManipulationPath::start() const {
    if (segments_.empty()) throw OutOfDomainError("start: empty path");
    return segments_.front().start();
}

const CompositeConfig& ManipulationPath::end() const {
    if (segments_.empty()) throw OutOfDomainError("end: empty path");
    return segments_.back().end();
}

namespace {

CompositeConfig interpolate(const CompositeConfig& a, const CompositeConfig& b, double t) {
    CompositeConfig out;
    out.q = (1.0 - t) * a.q + t * b.q;
    out.object_pose.translation =
        (1.0 - t) * a.object_pose.translation + t * b.object_pose.translation;
    out.object_pose.rotation = a.object_pose.rotation.slerp(t, b.object_pose.rotation);
    return out;
}

CompositeConfig evaluate_segment(const SingleModePath& seg, double t) {
    const std::size_t n = seg.waypoints.size();
    if (n == 1) return seg.waypoints.front();
    const double pos = t * static_cast<double>(n - 1);
    const auto lo = std::min(static_cast<std::size_t>(pos), n - 2);
    return interpolate(seg.waypoints[lo], seg.waypoints[lo + 1], pos - static_cast<double>(lo));
}

}  // namespace

CompositeConfig ManipulationPath::evaluate(double s) const {
    const int len = domain_length();
    if (segments_.empty() || s < -1e-12 || s > len + 1e-12) {
        throw OutOfDomainError("evaluate: s outside [0, |M|]");
    }
    s = std::clamp(s, 0.0, static_cast<double>(len));

    // Split segments into same-kind runs; run r covers [r, r+1].
    std::vector<std::pair<std::size_t, std::size_t>> runs;  // [first, last]
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (i == 0 || segments_[i].kind != segments_[i - 1].kind) {
            runs.emplace_back(i, i);
        } else {
            runs.back().second = i;
        }
    }
    const auto r = std::min(static_cast<std::size_t>(s), runs.size() - 1);
    const double local = s - static_cast<double>(r);
    const auto [first, last] = runs[r];
    const auto count = last - first + 1;
    const double scaled = local * static_cast<double>(count);
    const auto k = std::min(static_cast<std::size_t>(scaled), count - 1);
    return evaluate_segment(segments_[first + k], scaled - static_cast<double>(k));
}

ManipulationPath compose(const ManipulationPath& p1, const ManipulationPath& p2) {
    if (p1.empty()) return p2;
    if (p2.empty()) return p1;
    if (!p1.end().approx_equal(p2.start())) {
        throw EndpointMismatchError("compose: p1 must end where p2 starts");
    }
    std::vector<SingleModePath> segments = p1.segments();
    segments.insert(segments.end(), p2.segments().begin(), p2.segments().end());
    return ManipulationPath(std::move(segments));
}

ManipulationPath compose(const SingleModePath& p1, const SingleModePath& p2) {
    return compose(ManipulationPath(p1), ManipulationPath(p2));
}

ManipulationPath reduce(const ManipulationPath& path) {
    std::vector<SingleModePath> merged;
    for (const SingleModePath& seg : path.segments()) {
        if (!merged.empty() && merged.back().kind == seg.kind) {
            auto& dst = merged.back().waypoints;
            // Junction waypoint is shared; keep one copy.
            dst.insert(dst.end(), seg.waypoints.begin() + 1, seg.waypoints.end());
        } else {
            merged.push_back(seg);
        }
    }
    return ManipulationPath(std::move(merged));
}

}  // namespace regrasp
