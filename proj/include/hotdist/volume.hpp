/* Dense 3D volume container shared by every stage of the toolkit.
 *
 * Conventions (fixed project-wide):
 *   - axis order is (z, y, x), x fastest: value at (z,y,x) lives at
 *     data[(z*Y + y)*X + x]
 *   - spacing is physical units per voxel along (z, y, x), strictly positive
 *   - payloads are little-endian on disk (see volume_io.hpp)
 */

#ifndef HOTDIST_VOLUME_HPP
#define HOTDIST_VOLUME_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "hotdist/error.hpp"

namespace hotdist {

using i64 = std::int64_t;

struct Shape3 {
    i64 z = 0;
    i64 y = 0;
    i64 x = 0;

    i64 voxels() const { return z * y * x; }
    bool operator==(const Shape3&) const = default;
};

struct Spacing3 {
    double z = 1.0;
    double y = 1.0;
    double x = 1.0;

    double min() const { return z < y ? (z < x ? z : x) : (y < x ? y : x); }
    bool operator==(const Spacing3&) const = default;
};

template <typename T>
class Volume {
  public:
    using value_type = T;

    Shape3 shape;
    Spacing3 spacing;
    std::vector<T> data;

    Volume() = default;

    Volume(Shape3 s, Spacing3 sp, T fill = T{}) : shape(s), spacing(sp) {
        check_geometry(s, sp);
        data.assign(static_cast<std::size_t>(s.voxels()), fill);
    }

    static Volume from_data(Shape3 s, Spacing3 sp, std::vector<T> payload) {
        check_geometry(s, sp);
        if (static_cast<i64>(payload.size()) != s.voxels()) {
            throw Error("volume payload has " + std::to_string(payload.size()) +
                        " elements, shape needs " + std::to_string(s.voxels()));
        }
        Volume v;
        v.shape = s;
        v.spacing = sp;
        v.data = std::move(payload);
        return v;
    }

    i64 voxels() const { return shape.voxels(); }

    i64 index(i64 z, i64 y, i64 x) const { return (z * shape.y + y) * shape.x + x; }

    T& at(i64 z, i64 y, i64 x) { return data[static_cast<std::size_t>(index(z, y, x))]; }
    const T& at(i64 z, i64 y, i64 x) const { return data[static_cast<std::size_t>(index(z, y, x))]; }

    T& operator[](i64 i) { return data[static_cast<std::size_t>(i)]; }
    const T& operator[](i64 i) const { return data[static_cast<std::size_t>(i)]; }

    /// Same shape/spacing, different element type, default-filled.
    template <typename U>
    Volume<U> like(U fill = U{}) const {
        return Volume<U>(shape, spacing, fill);
    }

  private:
    static void check_geometry(const Shape3& s, const Spacing3& sp) {
        if (s.z < 1 || s.y < 1 || s.x < 1) {
            throw Error("volume shape components must be >= 1, got [" + std::to_string(s.z) + "," +
                        std::to_string(s.y) + "," + std::to_string(s.x) + "]");
        }
        if (!(sp.z > 0.0) || !(sp.y > 0.0) || !(sp.x > 0.0)) {
            throw Error("volume spacing components must be > 0");
        }
    }
};

enum class Dtype { u8, u32, f32, f64 };

template <typename T> struct dtype_of;
template <> struct dtype_of<std::uint8_t>  { static constexpr Dtype value = Dtype::u8; };
template <> struct dtype_of<std::uint32_t> { static constexpr Dtype value = Dtype::u32; };
template <> struct dtype_of<float>         { static constexpr Dtype value = Dtype::f32; };
template <> struct dtype_of<double>        { static constexpr Dtype value = Dtype::f64; };

std::string dtype_name(Dtype d);
Dtype dtype_from_name(const std::string& name);
std::size_t dtype_size(Dtype d);

/// Type-erased volume as it comes off disk; dtype is whatever the header declared.
using AnyVolume =
    std::variant<Volume<std::uint8_t>, Volume<std::uint32_t>, Volume<float>, Volume<double>>;

Dtype dtype_of_any(const AnyVolume& v);

}  // namespace hotdist

#endif
