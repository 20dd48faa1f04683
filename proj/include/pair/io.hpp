#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pair/grid.hpp"

namespace pair {

/// Strips a trailing .json or .cplx so either file of the pair (or the bare
/// stem) names the container.
std::filesystem::path container_stem(const std::filesystem::path &path);

/// Reads <stem>.json + <stem>.cplx. The payload is little-endian float32
/// re/im pairs in (shot, channel, row, column) order, column fastest.
AcquisitionSet load_acquisition(const std::filesystem::path &path);

/// Writes the container pair. extra_header entries (e.g. a config hash) are
/// merged into the JSON header; they must not collide with format keys.
void save_acquisition(const AcquisitionSet &set,
                      const std::filesystem::path &path,
                      const std::vector<std::pair<std::string, std::string>>
                          &extra_header = {});

// The same container carries coil maps (H in the channel slot, J = 1),
// per-shot phases (J in the shot slot, H = 1) and single images.
void save_coils(const CoilMapSet &coils, const std::filesystem::path &path,
                const std::vector<std::pair<std::string, std::string>>
                    &extra_header = {});
CoilMapSet load_coils(const std::filesystem::path &path);

void save_image_stack(const std::vector<ComplexImage> &images,
                      const std::filesystem::path &path,
                      const std::vector<std::pair<std::string, std::string>>
                          &extra_header = {});
std::vector<ComplexImage> load_image_stack(const std::filesystem::path &path);

void save_real_image(const RealImage &image, const std::filesystem::path &path,
                     const std::vector<std::pair<std::string, std::string>>
                         &extra_header = {});
RealImage load_real_image(const std::filesystem::path &path);

struct GrayWindow {
  double lo = 0.0;
  double hi = 1.0;
};

/// 8-bit binary PGM. Pixel = floor(255 * clamp((v - lo) / (hi - lo)) + 0.5),
/// so exact halves round up. Without a window, [0, 99.5th percentile].
void export_grayscale(const RealImage &image, const std::filesystem::path &path,
                      std::optional<GrayWindow> window = std::nullopt,
                      const std::string &comment = {});

/// Quantization used by export_grayscale, exposed for checking.
std::vector<unsigned char> quantize_gray(const RealImage &image,
                                         GrayWindow window);
GrayWindow auto_window(const RealImage &image);

/// Root-sum-of-squares over channels of the zero-filled image of all shots'
/// k-space summed per channel.
RealImage zero_filled_combined(const AcquisitionSet &set);

/// Rescales k-space so the zero-filled combined image peaks at 1. Returns the
/// rescaled set and the factor that was applied.
std::pair<AcquisitionSet, double> normalize_global(const AcquisitionSet &set);

} // namespace pair
