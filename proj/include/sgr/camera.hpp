#pragma once

#include "sgr/errors.hpp"
#include "sgr/geometry.hpp"

namespace sgr {

enum class CameraKind { pinhole, cylindrical };

/// Camera intrinsics plus extrinsics [R|t] mapping robot-frame points into
/// the camera frame (p_cam = R * p + t).
///
/// Pinhole follows the usual z-forward convention. The cylindrical model
/// describes a full panorama: seam_azimuth_deg is the camera-frame azimuth
/// mapped to u = 0, v_center the horizon row, fv the vertical focal length.
struct CameraModel {
    CameraKind kind = CameraKind::pinhole;

    // pinhole
    double fx = 0, fy = 0, cx = 0, cy = 0;

    // cylindrical
    double seam_azimuth_deg = 0;
    double v_center = 0;
    double fv = 0;

    Mat3 rotation;       // robot -> camera
    Vec3 translation;    // meters

    bool operator==(const CameraModel& o) const = default;

    void validate() const {
        if (!rotation.is_rotation(1e-6))
            throw BadRotation("R is not orthonormal with determinant +1");
        if (kind == CameraKind::pinhole) {
            if (!(fx > 0) || !(fy > 0)) throw SchemaError("pinhole camera requires fx > 0 and fy > 0");
        } else {
            if (!(fv > 0)) throw SchemaError("cylindrical camera requires fv > 0");
        }
    }

    static CameraModel make_pinhole(double fx, double fy, double cx, double cy,
                                    const Mat3& r = {}, const Vec3& t = {}) {
        CameraModel c;
        c.kind = CameraKind::pinhole;
        c.fx = fx; c.fy = fy; c.cx = cx; c.cy = cy;
        c.rotation = r; c.translation = t;
        c.validate();
        return c;
    }

    static CameraModel make_cylindrical(double seam_azimuth_deg, double v_center, double fv,
                                        const Mat3& r = {}, const Vec3& t = {}) {
        CameraModel c;
        c.kind = CameraKind::cylindrical;
        c.seam_azimuth_deg = seam_azimuth_deg; c.v_center = v_center; c.fv = fv;
        c.rotation = r; c.translation = t;
        c.validate();
        return c;
    }
};

} // namespace sgr
