/* On-disk formats.
 *
 * Volume:  <name>.hdvol.json header + raw little-endian payload, C order
 *          (x fastest). Header keys: shape [z,y,x], spacing [sz,sy,sx],
 *          dtype ("u8"|"u32"|"f32"|"f64"), data (payload path relative to
 *          the header's directory).
 * Schema:  <name>.schema.json {"classes":[{"id":N,"name":".."},...],
 *          "exclusivity_groups":[[ids...],...]}
 * Crop:    <name>.crop.json {"annotated_classes":[ids...],"closed_world":bool}
 *
 * Writers are deterministic: identical inputs produce byte-identical files.
 * Round-trips are bit-exact, payload and spacing included.
 */

#ifndef HOTDIST_VOLUME_IO_HPP
#define HOTDIST_VOLUME_IO_HPP

#include <filesystem>

#include "hotdist/schema.hpp"
#include "hotdist/volume.hpp"

namespace hotdist {

AnyVolume read_volume(const std::filesystem::path& header_path);
void write_volume(const AnyVolume& v, const std::filesystem::path& header_path);

template <typename T>
void write_volume(const Volume<T>& v, const std::filesystem::path& header_path) {
    write_volume(AnyVolume(v), header_path);
}

/// read_volume + dtype check; throws Error when the file holds another dtype.
template <typename T>
Volume<T> read_volume_as(const std::filesystem::path& header_path) {
    AnyVolume any = read_volume(header_path);
    if (auto* v = std::get_if<Volume<T>>(&any)) return std::move(*v);
    throw Error(header_path.string() + ": expected dtype " +
                dtype_name(dtype_of<T>::value) + ", file holds " +
                dtype_name(dtype_of_any(any)));
}

ClassSchema read_schema(const std::filesystem::path& path);
void write_schema(const ClassSchema& schema, const std::filesystem::path& path);

CropMeta read_crop(const std::filesystem::path& path);
void write_crop(const CropMeta& meta, const std::filesystem::path& path);

/// Load a labeled crop from its three files and validate it.
LabelVolume load_label_volume(const std::filesystem::path& labels_header,
                              const std::filesystem::path& schema_path,
                              const std::filesystem::path& crop_path);

}  // namespace hotdist

#endif
