#include "hotdist/edt.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace hotdist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/* 1-D squared distance transform of a sampled function, lower envelope of
 * parabolas (Felzenszwalb & Huttenlocher, "Distance Transforms of Sampled
 * Functions", Theory of Computing 8, 2012), with two extensions:
 *   - a per-axis weight w so anisotropic voxel spacing stays exact:
 *     out[q] = min_p (w^2 (q-p)^2 + f[p])
 *   - +inf entries of f contribute no parabola, so rows with no sites
 *     propagate the all-inf sentinel instead of poisoning the hull.
 *
 * f is read and overwritten in place. v/z/ff are caller scratch of size
 * n / n+1 / n.
 */
void parabolic_pass(std::vector<double>& f, double w2, std::vector<int>& v,
                    std::vector<double>& z, std::vector<double>& ff) {
    const int n = static_cast<int>(f.size());
    ff.assign(f.begin(), f.end());

    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (ff[q] == kInf) continue;
        double s = 0.0;
        while (k >= 0) {
            const int p = v[k];
            // Intersection of the parabolas rooted at q and p.
            s = (ff[q] - ff[p] + w2 * (static_cast<double>(q) * q - static_cast<double>(p) * p)) /
                (2.0 * w2 * (q - p));
            if (s <= z[k]) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        v[k] = q;
        z[k] = (k == 0) ? -kInf : s;
        z[k + 1] = kInf;
    }

    if (k < 0) {
        // No finite entries in this line.
        return;
    }

    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[j + 1] < static_cast<double>(q)) ++j;
        const double d = static_cast<double>(q - v[j]);
        f[q] = w2 * d * d + ff[v[j]];
    }
}

}  // namespace

namespace detail {

SquaredEdt squared_edt_weighted(const Volume<std::uint8_t>& binary, double wz, double wy,
                                double wx) {
    if (!(wz > 0.0) || !(wy > 0.0) || !(wx > 0.0)) {
        throw Error("distance weights must be > 0");
    }

    const Shape3 s = binary.shape;
    Volume<double> d2(s, binary.spacing, kInf);

    bool has_sites = false;
    for (i64 i = 0; i < binary.voxels(); ++i) {
        if (binary[i] != 0) {
            d2[i] = 0.0;
            has_sites = true;
        }
    }
    if (!has_sites) return {std::move(d2), false};

    const int n_max = static_cast<int>(std::max(s.z, std::max(s.y, s.x)));
    std::vector<double> line(static_cast<std::size_t>(n_max));
    std::vector<int> v(static_cast<std::size_t>(n_max));
    std::vector<double> z(static_cast<std::size_t>(n_max) + 1);
    std::vector<double> ff(static_cast<std::size_t>(n_max));

    // Pass along x (stride 1).
    line.resize(static_cast<std::size_t>(s.x));
    for (i64 zz = 0; zz < s.z; ++zz) {
        for (i64 yy = 0; yy < s.y; ++yy) {
            const i64 base = (zz * s.y + yy) * s.x;
            for (i64 xx = 0; xx < s.x; ++xx) line[static_cast<std::size_t>(xx)] = d2[base + xx];
            parabolic_pass(line, wx * wx, v, z, ff);
            for (i64 xx = 0; xx < s.x; ++xx) d2[base + xx] = line[static_cast<std::size_t>(xx)];
        }
    }

    // Pass along y (stride x).
    line.resize(static_cast<std::size_t>(s.y));
    for (i64 zz = 0; zz < s.z; ++zz) {
        for (i64 xx = 0; xx < s.x; ++xx) {
            const i64 base = zz * s.y * s.x + xx;
            for (i64 yy = 0; yy < s.y; ++yy) line[static_cast<std::size_t>(yy)] = d2[base + yy * s.x];
            parabolic_pass(line, wy * wy, v, z, ff);
            for (i64 yy = 0; yy < s.y; ++yy) d2[base + yy * s.x] = line[static_cast<std::size_t>(yy)];
        }
    }

    // Pass along z (stride x*y).
    line.resize(static_cast<std::size_t>(s.z));
    const i64 plane = s.y * s.x;
    for (i64 yy = 0; yy < s.y; ++yy) {
        for (i64 xx = 0; xx < s.x; ++xx) {
            const i64 base = yy * s.x + xx;
            for (i64 zz = 0; zz < s.z; ++zz) line[static_cast<std::size_t>(zz)] = d2[base + zz * plane];
            parabolic_pass(line, wz * wz, v, z, ff);
            for (i64 zz = 0; zz < s.z; ++zz) d2[base + zz * plane] = line[static_cast<std::size_t>(zz)];
        }
    }

    return {std::move(d2), true};
}

Volume<double> signed_distance_weighted(const Volume<std::uint8_t>& binary, double wz, double wy,
                                        double wx) {
    Volume<std::uint8_t> complement = binary.like<std::uint8_t>();
    for (i64 i = 0; i < binary.voxels(); ++i) complement[i] = binary[i] ? 0 : 1;

    // Distance to the nearest foreground site (valid at background voxels)
    // and to the nearest background site (valid at foreground voxels).
    SquaredEdt to_fg = squared_edt_weighted(binary, wz, wy, wx);
    SquaredEdt to_bg = squared_edt_weighted(complement, wz, wy, wx);

    Volume<double> out = binary.like<double>();
    for (i64 i = 0; i < binary.voxels(); ++i) {
        out[i] = binary[i] ? std::sqrt(to_bg.dist2[i]) : -std::sqrt(to_fg.dist2[i]);
    }
    return out;
}

}  // namespace detail

SquaredEdt squared_edt(const Volume<std::uint8_t>& binary) {
    return detail::squared_edt_weighted(binary, binary.spacing.z, binary.spacing.y,
                                        binary.spacing.x);
}

Volume<double> signed_distance(const Volume<std::uint8_t>& binary) {
    return detail::signed_distance_weighted(binary, binary.spacing.z, binary.spacing.y,
                                            binary.spacing.x);
}

}  // namespace hotdist
