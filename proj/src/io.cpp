#include "pair/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "pair/error.hpp"
#include "pair/operators.hpp"

namespace pair {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big)
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) |
           (v >> 24);
  return v;
}

void write_float(std::ostream &os, float f) {
  const std::uint32_t bits = to_little(std::bit_cast<std::uint32_t>(f));
  os.write(reinterpret_cast<const char *>(&bits), sizeof bits);
}

// Runs alternate absent/present over the row-major mask, starting absent.
std::vector<std::int64_t> encode_runs(const MaskGrid &bits) {
  std::vector<std::int64_t> runs;
  bool current = false;
  std::int64_t count = 0;
  for (Eigen::Index r = 0; r < bits.rows(); ++r)
    for (Eigen::Index c = 0; c < bits.cols(); ++c) {
      if (bits(r, c) != current) {
        runs.push_back(count);
        current = !current;
        count = 0;
      }
      ++count;
    }
  runs.push_back(count);
  return runs;
}

MaskGrid decode_runs(const std::vector<std::int64_t> &runs, Eigen::Index rows,
                     Eigen::Index cols) {
  MaskGrid bits(rows, cols);
  std::int64_t pos = 0;
  const std::int64_t total = static_cast<std::int64_t>(rows * cols);
  bool current = false;
  for (std::int64_t run : runs) {
    require(run >= 0 && pos + run <= total, ErrorKind::Format,
            "mask run-length encoding overflows the grid");
    for (std::int64_t i = 0; i < run; ++i, ++pos)
      bits(pos / cols, pos % cols) = current;
    current = !current;
  }
  require(pos == total, ErrorKind::Format,
          "mask run-length encoding does not cover the grid");
  return bits;
}

json header_for(const AcquisitionSet &set,
                const std::vector<std::pair<std::string, std::string>> &extra) {
  json h;
  h["format"] = "msk";
  h["version"] = kFormatVersion;
  h["rows"] = set.rows();
  h["cols"] = set.cols();
  h["channels"] = set.channels();
  h["shots"] = set.shots();
  h["dtype"] = "complex64";
  h["endianness"] = "little";
  h["order"] = "shot,channel,row,column";
  h["b_value"] = set.meta().b_value;
  if (set.meta().direction) {
    const auto &d = *set.meta().direction;
    h["direction"] = {d[0], d[1], d[2]};
  } else {
    h["direction"] = nullptr;
  }
  json masks = json::array();
  for (const auto &m : set.masks())
    masks.push_back({{"kind", to_string(m.kind)}, {"runs", encode_runs(m.bits)}});
  h["masks"] = masks;
  for (const auto &[k, v] : extra) {
    require(!h.contains(k), ErrorKind::Config,
            "extra header key '" + k + "' collides with the format");
    h[k] = v;
  }
  return h;
}

template <class T> T get_field(const json &h, const char *key) {
  require(h.contains(key), ErrorKind::Format,
          std::string("header is missing '") + key + "'");
  try {
    return h.at(key).get<T>();
  } catch (const json::exception &e) {
    fail(ErrorKind::Format, std::string("header field '") + key +
                                "' has the wrong type: " + e.what());
  }
}

std::vector<SamplingMask> full_masks(int shots, Eigen::Index rows,
                                     Eigen::Index cols) {
  return std::vector<SamplingMask>(
      static_cast<std::size_t>(shots),
      SamplingMask{MaskGrid::Constant(rows, cols, true),
                   MaskKind::FullInterleave});
}

} // namespace

fs::path container_stem(const fs::path &path) {
  const auto ext = path.extension();
  if (ext == ".json" || ext == ".cplx") {
    fs::path stem = path;
    stem.replace_extension();
    return stem;
  }
  return path;
}

void save_acquisition(
    const AcquisitionSet &set, const fs::path &path,
    const std::vector<std::pair<std::string, std::string>> &extra_header) {
  const fs::path stem = container_stem(path);
  if (stem.has_parent_path())
    fs::create_directories(stem.parent_path());
  const json header = header_for(set, extra_header);
  {
    std::ofstream os(fs::path(stem).concat(".json"));
    require(static_cast<bool>(os), ErrorKind::Io,
            "cannot write " + stem.string() + ".json");
    os << header.dump(2) << '\n';
    require(static_cast<bool>(os), ErrorKind::Io, "write failed");
  }
  std::ofstream os(fs::path(stem).concat(".cplx"), std::ios::binary);
  require(static_cast<bool>(os), ErrorKind::Io,
          "cannot write " + stem.string() + ".cplx");
  for (int j = 0; j < set.shots(); ++j)
    for (int h = 0; h < set.channels(); ++h) {
      const ComplexImage &k = set.kspace(j, h);
      for (Eigen::Index r = 0; r < k.rows(); ++r)
        for (Eigen::Index c = 0; c < k.cols(); ++c) {
          write_float(os, static_cast<float>(k(r, c).real()));
          write_float(os, static_cast<float>(k(r, c).imag()));
        }
    }
  require(static_cast<bool>(os), ErrorKind::Io, "payload write failed");
}

AcquisitionSet load_acquisition(const fs::path &path) {
  const fs::path stem = container_stem(path);
  const fs::path header_path = fs::path(stem).concat(".json");
  const fs::path payload_path = fs::path(stem).concat(".cplx");
  std::ifstream hs(header_path);
  require(static_cast<bool>(hs), ErrorKind::Io,
          "cannot open " + header_path.string());
  json h;
  try {
    h = json::parse(hs);
  } catch (const json::exception &e) {
    fail(ErrorKind::Format, "malformed header: " + std::string(e.what()));
  }
  require(h.is_object(), ErrorKind::Format, "header is not a JSON object");
  require(get_field<std::string>(h, "format") == "msk", ErrorKind::Format,
          "not an msk header");
  require(get_field<int>(h, "version") == kFormatVersion, ErrorKind::Format,
          "unsupported msk version");
  require(get_field<std::string>(h, "dtype") == "complex64", ErrorKind::Format,
          "unsupported dtype");
  require(get_field<std::string>(h, "endianness") == "little",
          ErrorKind::Format, "unsupported endianness");
  const auto rows = get_field<std::int64_t>(h, "rows");
  const auto cols = get_field<std::int64_t>(h, "cols");
  const auto channels = get_field<std::int64_t>(h, "channels");
  const auto shots = get_field<std::int64_t>(h, "shots");
  require(rows >= 1 && cols >= 1 && channels >= 1 && shots >= 1,
          ErrorKind::Format, "header dimensions must be positive");

  AcquisitionMeta meta;
  meta.b_value = get_field<double>(h, "b_value");
  if (h.contains("direction") && !h["direction"].is_null()) {
    const auto d = get_field<std::vector<double>>(h, "direction");
    require(d.size() == 3, ErrorKind::Format, "direction must have 3 entries");
    meta.direction = std::array<double, 3>{d[0], d[1], d[2]};
  }

  const json &mj = h.contains("masks") ? h["masks"] : json();
  require(mj.is_array(), ErrorKind::Format, "header 'masks' must be an array");
  require(static_cast<std::int64_t>(mj.size()) == shots, ErrorKind::Format,
          "header lists " + std::to_string(mj.size()) + " masks for " +
              std::to_string(shots) + " shots");
  std::vector<SamplingMask> masks;
  for (const json &m : mj) {
    require(m.is_object(), ErrorKind::Format, "mask entry is not an object");
    SamplingMask sm;
    sm.kind = mask_kind_from_string(get_field<std::string>(m, "kind"));
    sm.bits = decode_runs(get_field<std::vector<std::int64_t>>(m, "runs"),
                          rows, cols);
    masks.push_back(std::move(sm));
  }

  const std::uintmax_t expected = static_cast<std::uintmax_t>(
      shots * channels * rows * cols * 2 * static_cast<std::int64_t>(sizeof(float)));
  std::error_code ec;
  const std::uintmax_t actual = fs::file_size(payload_path, ec);
  require(!ec, ErrorKind::Io, "cannot stat " + payload_path.string());
  require(actual == expected, ErrorKind::Format,
          "payload size " + std::to_string(actual) + " bytes, expected " +
              std::to_string(expected));

  std::ifstream ps(payload_path, std::ios::binary);
  require(static_cast<bool>(ps), ErrorKind::Io,
          "cannot open " + payload_path.string());
  std::vector<std::uint32_t> raw(static_cast<std::size_t>(expected / 4));
  ps.read(reinterpret_cast<char *>(raw.data()),
          static_cast<std::streamsize>(expected));
  require(static_cast<bool>(ps), ErrorKind::Io, "payload read failed");

  std::vector<std::vector<ComplexImage>> kspace(static_cast<std::size_t>(shots));
  std::size_t pos = 0;
  for (auto &shot : kspace)
    for (std::int64_t c = 0; c < channels; ++c) {
      ComplexImage k(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index q = 0; q < cols; ++q) {
          const float re = std::bit_cast<float>(to_little(raw[pos++]));
          const float im = std::bit_cast<float>(to_little(raw[pos++]));
          require(std::isfinite(re) && std::isfinite(im), ErrorKind::Format,
                  "non-finite value in payload");
          k(r, q) = cplx(re, im);
        }
      shot.push_back(std::move(k));
    }
  return AcquisitionSet(std::move(kspace), std::move(masks), meta);
}

void save_coils(const CoilMapSet &coils, const fs::path &path,
                const std::vector<std::pair<std::string, std::string>> &extra) {
  std::vector<std::vector<ComplexImage>> k{coils.maps()};
  AcquisitionSet set(std::move(k), full_masks(1, coils.rows(), coils.cols()));
  auto header = extra;
  header.emplace_back("content", coils.is_normalized() ? "coil-maps-normalized"
                                                       : "coil-maps");
  save_acquisition(set, path, header);
}

CoilMapSet load_coils(const fs::path &path) {
  const AcquisitionSet set = load_acquisition(path);
  require(set.shots() == 1, ErrorKind::Format,
          "coil container must hold exactly one shot");
  std::vector<ComplexImage> maps;
  for (int h = 0; h < set.channels(); ++h)
    maps.push_back(set.kspace(0, h));
  std::ifstream hs(fs::path(container_stem(path)).concat(".json"));
  const json header = json::parse(hs);
  const bool normalized =
      header.value("content", std::string()) == "coil-maps-normalized";
  return CoilMapSet(std::move(maps), normalized);
}

void save_image_stack(
    const std::vector<ComplexImage> &images, const fs::path &path,
    const std::vector<std::pair<std::string, std::string>> &extra) {
  require(!images.empty(), ErrorKind::Shape, "empty image stack");
  // Stacks ride in the channel slot of a single full shot.
  std::vector<std::vector<ComplexImage>> k{images};
  AcquisitionSet set(std::move(k), full_masks(1, images.front().rows(),
                                              images.front().cols()));
  auto header = extra;
  header.emplace_back("content", "image-stack");
  save_acquisition(set, path, header);
}

std::vector<ComplexImage> load_image_stack(const fs::path &path) {
  const AcquisitionSet set = load_acquisition(path);
  require(set.shots() == 1, ErrorKind::Format,
          "image stack container must hold one shot");
  std::vector<ComplexImage> out;
  for (int h = 0; h < set.channels(); ++h)
    out.push_back(set.kspace(0, h));
  return out;
}

void save_real_image(
    const RealImage &image, const fs::path &path,
    const std::vector<std::pair<std::string, std::string>> &extra) {
  save_image_stack({image.cast<cplx>()}, path, extra);
}

RealImage load_real_image(const fs::path &path) {
  const auto stack = load_image_stack(path);
  require(stack.size() == 1, ErrorKind::Format,
          "expected a single image in " + path.string());
  return stack.front().real();
}

GrayWindow auto_window(const RealImage &image) {
  require(image.size() > 0, ErrorKind::Shape, "empty image");
  std::vector<double> v(image.data(), image.data() + image.size());
  const std::size_t idx =
      static_cast<std::size_t>(std::floor(0.995 * static_cast<double>(v.size() - 1)));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(idx),
                   v.end());
  double hi = v[idx];
  if (hi <= 0.0)
    hi = image.maxCoeff();
  if (hi <= 0.0)
    hi = 1.0;
  return {0.0, hi};
}

std::vector<unsigned char> quantize_gray(const RealImage &image,
                                         GrayWindow window) {
  require(image.size() > 0, ErrorKind::Shape, "empty image");
  require(window.hi > window.lo, ErrorKind::Domain, "empty gray window");
  std::vector<unsigned char> out;
  out.reserve(static_cast<std::size_t>(image.size()));
  const double span = window.hi - window.lo;
  for (Eigen::Index r = 0; r < image.rows(); ++r)
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      const double t = std::clamp((image(r, c) - window.lo) / span, 0.0, 1.0);
      out.push_back(static_cast<unsigned char>(std::floor(255.0 * t + 0.5)));
    }
  return out;
}

void export_grayscale(const RealImage &image, const fs::path &path,
                      std::optional<GrayWindow> window,
                      const std::string &comment) {
  require(image.size() > 0, ErrorKind::Shape, "cannot export an empty image");
  require(image.allFinite(), ErrorKind::Numerical, "image is not finite");
  require(path.extension() == ".pgm", ErrorKind::Config,
          "grayscale export writes .pgm files");
  const GrayWindow w = window ? *window : auto_window(image);
  const auto pixels = quantize_gray(image, w);
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorKind::Io, "cannot write " + path.string());
  os << "P5\n";
  if (!comment.empty())
    os << "# " << comment << '\n';
  os << image.cols() << ' ' << image.rows() << "\n255\n";
  os.write(reinterpret_cast<const char *>(pixels.data()),
           static_cast<std::streamsize>(pixels.size()));
  require(static_cast<bool>(os), ErrorKind::Io, "PGM write failed");
}

RealImage zero_filled_combined(const AcquisitionSet &set) {
  RealImage ss = RealImage::Zero(set.rows(), set.cols());
  for (int h = 0; h < set.channels(); ++h) {
    ComplexImage k = ComplexImage::Zero(set.rows(), set.cols());
    for (int j = 0; j < set.shots(); ++j)
      k += set.kspace(j, h);
    ss += idft_centered(k).abs2();
  }
  return ss.sqrt();
}

std::pair<AcquisitionSet, double> normalize_global(const AcquisitionSet &set) {
  const double peak = zero_filled_combined(set).maxCoeff();
  require(peak > 0.0, ErrorKind::Domain, "cannot normalize all-zero data");
  const double scale = 1.0 / peak;
  return {set.scaled(scale), scale};
}

} // namespace pair
