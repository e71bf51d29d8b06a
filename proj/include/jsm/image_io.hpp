#pragma once

#include <jsm/color.hpp>
#include <jsm/error.hpp>
#include <jsm/image.hpp>

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cctype>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace jsm {

/// How integer code values relate to linear light.
enum class Transfer
{
    srgb,   ///< sRGB-encoded (colour images, the default)
    linear, ///< codes are linear (data planes, masks)
};

enum class FileFormat
{
    png,
    pnm,
    pfm,
};

/// Samples exactly as stored in the file, before any normalization.
///
/// Integer formats keep their code values (0..max_code); PFM keeps its floats,
/// including inf/NaN markers. Rows are top-to-bottom, pixel-interleaved.
struct RawImage
{
    int width = 0;
    int height = 0;
    int channels = 0;
    int max_code = 0; ///< 0 for floating-point sources
    FileFormat format = FileFormat::png;
    std::vector<double> values;

    double at(int x, int y, int c = 0) const
    {
        return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
};

namespace detail {

inline std::vector<unsigned char> read_file_bytes(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "' for reading");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError("read error on '" + path.string() + "'");
    if (bytes.empty())
        throw IoError("'" + path.string() + "' is empty");
    return bytes;
}

inline bool starts_with(std::vector<unsigned char> const& bytes, std::string_view magic)
{
    return bytes.size() >= magic.size()
           && std::equal(magic.begin(), magic.end(), bytes.begin(),
                         [](char a, unsigned char b) { return static_cast<unsigned char>(a) == b; });
}

inline std::string sniff_foreign_format(std::vector<unsigned char> const& bytes)
{
    if (bytes.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xD8)
        return "JPEG";
    if (starts_with(bytes, "GIF8"))
        return "GIF";
    if (starts_with(bytes, "BM"))
        return "BMP";
    if (starts_with(bytes, "II*") || starts_with(bytes, "MM\0*"))
        return "TIFF";
    if (bytes.size() >= 4 && bytes[0] == 0x76 && bytes[1] == 0x2F && bytes[2] == 0x31
        && bytes[3] == 0x01)
        return "OpenEXR";
    if (starts_with(bytes, "P1") || starts_with(bytes, "P2") || starts_with(bytes, "P3")
        || starts_with(bytes, "P4"))
        return "ASCII/bitmap PNM";
    return "unknown";
}

// ---- PNM / PFM ------------------------------------------------------------

class HeaderReader
{
public:
    HeaderReader(std::vector<unsigned char> const& bytes, std::string name)
    : _bytes(bytes), _name(std::move(name))
    {
    }

    std::string token()
    {
        skip_space_and_comments();
        std::string tok;
        while (_pos < _bytes.size() && !std::isspace(_bytes[_pos]))
            tok.push_back(static_cast<char>(_bytes[_pos++]));
        if (tok.empty())
            throw FormatError("truncated header in '" + _name + "'");
        return tok;
    }

    long integer()
    {
        auto tok = token();
        try {
            std::size_t used = 0;
            long v = std::stol(tok, &used);
            if (used != tok.size())
                throw std::invalid_argument(tok);
            return v;
        }
        catch (std::logic_error const&) {
            throw FormatError("bad header field '" + tok + "' in '" + _name + "'");
        }
    }

    double real()
    {
        auto tok = token();
        try {
            return std::stod(tok);
        }
        catch (std::logic_error const&) {
            throw FormatError("bad header field '" + tok + "' in '" + _name + "'");
        }
    }

    /// Consumes the single whitespace byte that ends a binary header.
    std::size_t data_offset()
    {
        if (_pos >= _bytes.size())
            throw FormatError("missing pixel data in '" + _name + "'");
        return _pos + 1;
    }

private:
    void skip_space_and_comments()
    {
        while (_pos < _bytes.size()) {
            if (std::isspace(_bytes[_pos])) {
                ++_pos;
            }
            else if (_bytes[_pos] == '#') {
                while (_pos < _bytes.size() && _bytes[_pos] != '\n')
                    ++_pos;
            }
            else {
                break;
            }
        }
    }

    std::vector<unsigned char> const& _bytes;
    std::string _name;
    std::size_t _pos = 2;
};

inline RawImage parse_pnm(std::vector<unsigned char> const& bytes, std::string const& name)
{
    RawImage raw;
    raw.format = FileFormat::pnm;
    raw.channels = bytes[1] == '6' ? 3 : 1;
    HeaderReader header(bytes, name);
    long const w = header.integer();
    long const h = header.integer();
    long const maxval = header.integer();
    if (w < 1 || h < 1 || maxval < 1 || maxval > 65535)
        throw FormatError("invalid PNM header in '" + name + "'");
    std::size_t offset = header.data_offset();
    raw.width = static_cast<int>(w);
    raw.height = static_cast<int>(h);
    raw.max_code = static_cast<int>(maxval);

    std::size_t const bytes_per_sample = maxval > 255 ? 2 : 1;
    std::size_t const n = static_cast<std::size_t>(w) * h * raw.channels;
    if (bytes.size() < offset + n * bytes_per_sample)
        throw FormatError("truncated PNM pixel data in '" + name + "'");
    raw.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (bytes_per_sample == 1)
            raw.values[i] = bytes[offset + i];
        else
            raw.values[i] = (bytes[offset + 2 * i] << 8) | bytes[offset + 2 * i + 1];
    }
    return raw;
}

inline RawImage parse_pfm(std::vector<unsigned char> const& bytes, std::string const& name)
{
    RawImage raw;
    raw.format = FileFormat::pfm;
    raw.channels = bytes[1] == 'F' ? 3 : 1;
    HeaderReader header(bytes, name);
    long const w = header.integer();
    long const h = header.integer();
    double const scale = header.real();
    if (w < 1 || h < 1 || scale == 0.0 || !std::isfinite(scale))
        throw FormatError("invalid PFM header in '" + name + "'");
    std::size_t offset = header.data_offset();
    raw.width = static_cast<int>(w);
    raw.height = static_cast<int>(h);
    bool const little = scale < 0.0;

    std::size_t const row = static_cast<std::size_t>(w) * raw.channels;
    std::size_t const n = row * h;
    if (bytes.size() < offset + n * 4)
        throw FormatError("truncated PFM pixel data in '" + name + "'");
    raw.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        unsigned char b[4];
        std::memcpy(b, &bytes[offset + 4 * i], 4);
        if (little != (std::endian::native == std::endian::little))
            std::reverse(std::begin(b), std::end(b));
        float f;
        std::memcpy(&f, b, 4);
        // PFM rows run bottom-to-top.
        std::size_t const y = i / row;
        std::size_t const x = i % row;
        raw.values[(h - 1 - y) * row + x] = f;
    }
    return raw;
}

// ---- PNG (libpng) ----------------------------------------------------------

struct PngReadState
{
    std::vector<unsigned char> const* bytes = nullptr;
    std::size_t pos = 0;
    char message[256] = {};
};

extern "C" inline void png_error_to_state(png_structp png, png_const_charp msg)
{
    auto* state = static_cast<PngReadState*>(png_get_error_ptr(png));
    std::snprintf(state->message, sizeof(state->message), "%s", msg);
    png_longjmp(png, 1);
}

extern "C" inline void png_warning_ignore(png_structp, png_const_charp) {}

extern "C" inline void png_read_from_memory(png_structp png, png_bytep out, png_size_t count)
{
    auto* state = static_cast<PngReadState*>(png_get_io_ptr(png));
    if (state->pos + count > state->bytes->size())
        png_error(png, "unexpected end of PNG data");
    std::memcpy(out, state->bytes->data() + state->pos, count);
    state->pos += count;
}

// Only trivially destructible locals live in this frame, so longjmp is safe.
inline bool png_decode(PngReadState& state, RawImage& raw, std::vector<png_bytep>& rows,
                       std::vector<unsigned char>& pixels)
{
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state, png_error_to_state,
                                             png_warning_ignore);
    if (png == nullptr)
        return false;
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    png_set_read_fn(png, &state, png_read_from_memory);
    png_read_info(png, info);

    int const color_type = png_get_color_type(png, info);
    int const bit_depth = png_get_bit_depth(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(png);
    if (bit_depth == 16 && std::endian::native == std::endian::little)
        png_set_swap(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    raw.width = static_cast<int>(png_get_image_width(png, info));
    raw.height = static_cast<int>(png_get_image_height(png, info));
    raw.channels = png_get_channels(png, info);
    int const out_depth = png_get_bit_depth(png, info);
    raw.max_code = out_depth == 16 ? 65535 : 255;

    std::size_t const rowbytes = png_get_rowbytes(png, info);
    pixels.resize(rowbytes * raw.height);
    rows.resize(raw.height);
    for (int y = 0; y < raw.height; ++y)
        rows[y] = pixels.data() + rowbytes * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

inline RawImage parse_png(std::vector<unsigned char> const& bytes, std::string const& name)
{
    PngReadState state;
    state.bytes = &bytes;
    RawImage raw;
    raw.format = FileFormat::png;
    std::vector<png_bytep> rows;
    std::vector<unsigned char> pixels;
    if (!png_decode(state, raw, rows, pixels))
        throw FormatError("corrupt PNG '" + name + "': " + state.message);

    std::size_t const n = static_cast<std::size_t>(raw.width) * raw.height * raw.channels;
    raw.values.resize(n);
    if (raw.max_code == 65535) {
        for (std::size_t i = 0; i < n; ++i) {
            std::uint16_t v;
            std::memcpy(&v, pixels.data() + 2 * i, 2);
            raw.values[i] = v;
        }
    }
    else {
        for (std::size_t i = 0; i < n; ++i)
            raw.values[i] = pixels[i];
    }
    return raw;
}

struct PngWriteState
{
    std::vector<unsigned char>* out = nullptr;
    char message[256] = {};
};

extern "C" inline void png_write_error_to_state(png_structp png, png_const_charp msg)
{
    auto* state = static_cast<PngWriteState*>(png_get_error_ptr(png));
    std::snprintf(state->message, sizeof(state->message), "%s", msg);
    png_longjmp(png, 1);
}

extern "C" inline void png_write_to_memory(png_structp png, png_bytep data, png_size_t count)
{
    auto* state = static_cast<PngWriteState*>(png_get_io_ptr(png));
    state->out->insert(state->out->end(), data, data + count);
}

extern "C" inline void png_flush_noop(png_structp) {}

inline bool png_encode(PngWriteState& state, int width, int height, int channels, int bit_depth,
                       std::vector<png_bytep>& rows)
{
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &state,
                                              png_write_error_to_state, png_warning_ignore);
    if (png == nullptr)
        return false;
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_write_struct(&png, nullptr);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_set_write_fn(png, &state, png_write_to_memory, png_flush_noop);
    int const color_type = channels == 1   ? PNG_COLOR_TYPE_GRAY
                           : channels == 2 ? PNG_COLOR_TYPE_GRAY_ALPHA
                           : channels == 3 ? PNG_COLOR_TYPE_RGB
                                           : PNG_COLOR_TYPE_RGB_ALPHA;
    png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16 && std::endian::native == std::endian::little)
        png_set_swap(png);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

inline void write_file_bytes(std::filesystem::path const& path,
                             std::vector<unsigned char> const& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<char const*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("write error on '" + path.string() + "'");
}

/// Writes interleaved integer codes as PNG (1..4 channels, 8 or 16 bit).
inline void write_png_codes(std::filesystem::path const& path, int width, int height,
                            int channels, int bit_depth, std::vector<std::uint16_t> const& codes)
{
    std::size_t const bps = bit_depth == 16 ? 2 : 1;
    std::size_t const rowbytes = static_cast<std::size_t>(width) * channels * bps;
    std::vector<unsigned char> pixels(rowbytes * height);
    for (std::size_t i = 0; i < codes.size(); ++i) {
        if (bps == 2)
            std::memcpy(pixels.data() + 2 * i, &codes[i], 2);
        else
            pixels[i] = static_cast<unsigned char>(codes[i]);
    }
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y)
        rows[y] = pixels.data() + rowbytes * y;

    std::vector<unsigned char> encoded;
    PngWriteState state;
    state.out = &encoded;
    if (!png_encode(state, width, height, channels, bit_depth, rows))
        throw IoError("PNG encoding failed for '" + path.string() + "': " + state.message);
    write_file_bytes(path, encoded);
}

inline std::uint16_t encode_code(double v, Transfer transfer, int max_code)
{
    double const e = transfer == Transfer::srgb ? linear_to_srgb(v) : std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint16_t>(std::lround(e * max_code));
}

inline double decode_code(double code, Transfer transfer, int max_code)
{
    double const e = code / max_code;
    return transfer == Transfer::srgb ? srgb_to_linear(e) : e;
}

inline bool has_extension(std::filesystem::path const& path, std::string_view ext)
{
    auto e = path.extension().string();
    std::ranges::transform(e, e.begin(), [](unsigned char c) { return std::tolower(c); });
    return e == ext;
}

} // namespace detail

/// Reads PNG, binary PGM/PPM (P5/P6) or PFM without interpreting the samples.
inline RawImage read_raw(std::filesystem::path const& path)
{
    auto bytes = detail::read_file_bytes(path);
    auto const name = path.string();
    static constexpr unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    if (bytes.size() >= 8 && std::equal(std::begin(png_sig), std::end(png_sig), bytes.begin()))
        return detail::parse_png(bytes, name);
    if (detail::starts_with(bytes, "P5") || detail::starts_with(bytes, "P6"))
        return detail::parse_pnm(bytes, name);
    if (detail::starts_with(bytes, "PF") || detail::starts_with(bytes, "Pf"))
        return detail::parse_pfm(bytes, name);
    throw FormatError("unsupported image format '" + detail::sniff_foreign_format(bytes)
                      + "' in '" + name + "'");
}

/// Loads an 8/16-bit PNG or PPM/PGM as a linear-light buffer in [0,1].
///
/// Alpha channels are dropped. Code values are decoded with `transfer`
/// (sRGB by default).
inline ImageBuffer load_image(std::filesystem::path const& path, Transfer transfer = Transfer::srgb)
{
    RawImage raw = read_raw(path);
    if (raw.format == FileFormat::pfm)
        throw FormatError("PFM '" + path.string()
                          + "' holds float data; load it as a depth map instead");
    int const channels = raw.channels >= 3 ? 3 : 1;
    ImageBuffer img(raw.width, raw.height, channels);
    for (int c = 0; c < channels; ++c) {
        auto dst = img.plane(c);
        for (int y = 0; y < raw.height; ++y)
            for (int x = 0; x < raw.width; ++x)
                dst[static_cast<std::size_t>(y) * raw.width + x]
                    = detail::decode_code(raw.at(x, y, c), transfer, raw.max_code);
    }
    return img;
}

/// Saves as PNG (8 or 16 bit); `.ppm`/`.pgm` extensions select binary PNM.
///
/// Samples are clamped to [0,1] and encoded with `transfer`.
inline void save_image(ImageBuffer const& img, std::filesystem::path const& path,
                       int bit_depth = 8, Transfer transfer = Transfer::srgb)
{
    if (bit_depth != 8 && bit_depth != 16)
        throw ConfigError("bit depth must be 8 or 16, got " + std::to_string(bit_depth));
    int const max_code = bit_depth == 16 ? 65535 : 255;
    int const channels = img.channels();
    std::vector<std::uint16_t> codes(img.sample_count());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < channels; ++c)
                codes[(static_cast<std::size_t>(y) * img.width() + x) * channels + c]
                    = detail::encode_code(img(x, y, c), transfer, max_code);

    if (detail::has_extension(path, ".ppm") || detail::has_extension(path, ".pgm")) {
        std::ostringstream header;
        header << (channels == 3 ? "P6" : "P5") << "\n"
               << img.width() << " " << img.height() << "\n"
               << max_code << "\n";
        auto const h = header.str();
        std::vector<unsigned char> bytes(h.begin(), h.end());
        for (auto code : codes) {
            if (bit_depth == 16)
                bytes.push_back(static_cast<unsigned char>(code >> 8));
            bytes.push_back(static_cast<unsigned char>(code & 0xFF));
        }
        detail::write_file_bytes(path, bytes);
        return;
    }
    detail::write_png_codes(path, img.width(), img.height(), channels, bit_depth, codes);
}

/// 8-bit RGBA PNG with straight (non-premultiplied) alpha.
inline void save_rgba(ImageBuffer const& color, ImageBuffer const& alpha,
                      std::filesystem::path const& path, Transfer transfer = Transfer::srgb)
{
    require_channels(color, 3, "save_rgba");
    require_channels(alpha, 1, "save_rgba");
    require_same_size(color, alpha, "save_rgba");
    std::vector<std::uint16_t> codes(color.pixel_count() * 4);
    for (int y = 0; y < color.height(); ++y)
        for (int x = 0; x < color.width(); ++x) {
            std::size_t const i = (static_cast<std::size_t>(y) * color.width() + x) * 4;
            for (int c = 0; c < 3; ++c)
                codes[i + c] = detail::encode_code(color(x, y, c), transfer, 255);
            codes[i + 3] = detail::encode_code(alpha(x, y), Transfer::linear, 255);
        }
    detail::write_png_codes(path, color.width(), color.height(), 4, 8, codes);
}

/// Reads an RGBA (or RGB) PNG back into (colour, alpha) planes.
inline std::pair<ImageBuffer, ImageBuffer> load_rgba(std::filesystem::path const& path,
                                                     Transfer transfer = Transfer::srgb)
{
    RawImage raw = read_raw(path);
    if (raw.format == FileFormat::pfm || raw.channels < 3)
        throw FormatError("'" + path.string() + "' is not an RGB(A) image");
    ImageBuffer color(raw.width, raw.height, 3);
    ImageBuffer alpha(raw.width, raw.height, 1, 1.0);
    for (int y = 0; y < raw.height; ++y)
        for (int x = 0; x < raw.width; ++x) {
            for (int c = 0; c < 3; ++c)
                color(x, y, c) = detail::decode_code(raw.at(x, y, c), transfer, raw.max_code);
            if (raw.channels == 4)
                alpha(x, y) = raw.at(x, y, 3) / raw.max_code;
        }
    return {std::move(color), std::move(alpha)};
}

/// Writes a single-channel float plane as PFM. Non-finite values are allowed.
inline void save_pfm(std::filesystem::path const& path, int width, int height,
                     std::vector<float> const& values, bool little_endian = true)
{
    if (values.size() != static_cast<std::size_t>(width) * height)
        throw ShapeError("save_pfm: value count does not match dimensions");
    std::ostringstream header;
    header << "Pf\n" << width << " " << height << "\n" << (little_endian ? "-1.0" : "1.0") << "\n";
    auto const h = header.str();
    std::vector<unsigned char> bytes(h.begin(), h.end());
    for (int y = height - 1; y >= 0; --y)
        for (int x = 0; x < width; ++x) {
            unsigned char b[4];
            std::memcpy(b, &values[static_cast<std::size_t>(y) * width + x], 4);
            if (little_endian != (std::endian::native == std::endian::little))
                std::reverse(std::begin(b), std::end(b));
            bytes.insert(bytes.end(), std::begin(b), std::end(b));
        }
    detail::write_file_bytes(path, bytes);
}

} // namespace jsm
