#include "hotdist/volume.hpp"

namespace hotdist {

std::string dtype_name(Dtype d) {
    switch (d) {
        case Dtype::u8: return "u8";
        case Dtype::u32: return "u32";
        case Dtype::f32: return "f32";
        case Dtype::f64: return "f64";
    }
    throw Error("invalid dtype enum value");
}

Dtype dtype_from_name(const std::string& name) {
    if (name == "u8") return Dtype::u8;
    if (name == "u32") return Dtype::u32;
    if (name == "f32") return Dtype::f32;
    if (name == "f64") return Dtype::f64;
    throw Error("unknown dtype \"" + name + "\" (expected u8, u32, f32 or f64)");
}

std::size_t dtype_size(Dtype d) {
    switch (d) {
        case Dtype::u8: return 1;
        case Dtype::u32: return 4;
        case Dtype::f32: return 4;
        case Dtype::f64: return 8;
    }
    throw Error("invalid dtype enum value");
}

Dtype dtype_of_any(const AnyVolume& v) {
    return std::visit(
        [](const auto& vol) {
            using T = typename std::decay_t<decltype(vol)>::value_type;
            return dtype_of<T>::value;
        },
        v);
}

}  // namespace hotdist
