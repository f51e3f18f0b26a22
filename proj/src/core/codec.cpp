// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include "codec.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>

#include "error.hpp"

namespace scene_forge {

namespace {

std::uint8_t to_byte(float v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

Bytes write_png(png_image& img, const void* buffer) {
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&img, nullptr, &size, 0, buffer, 0, nullptr))
        fail(ErrorCode::Io, std::string("png encode: ") + img.message);
    Bytes out(size);
    if (!png_image_write_to_memory(&img, out.data(), &size, 0, buffer, 0, nullptr))
        fail(ErrorCode::Io, std::string("png encode: ") + img.message);
    out.resize(size);
    return out;
}

} // namespace

Bytes encode_png8(const Image& image) {
    if (image.channels != 1 && image.channels != 3) fail(ErrorCode::Shape, "png encode: 1 or 3 channels required");
    std::vector<std::uint8_t> raw(image.data.size());
    std::transform(image.data.begin(), image.data.end(), raw.begin(), to_byte);
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.width);
    img.height = static_cast<png_uint_32>(image.height);
    img.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    return write_png(img, raw.data());
}

Bytes encode_png16(const std::vector<std::uint16_t>& samples, int width, int height) {
    if (samples.size() != static_cast<std::size_t>(width) * height) fail(ErrorCode::Shape, "png16 encode: size mismatch");
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(width);
    img.height = static_cast<png_uint_32>(height);
    img.format = PNG_FORMAT_LINEAR_Y;
    return write_png(img, samples.data());
}

Image decode_png8(const Bytes& png, int channels) {
    if (channels != 1 && channels != 3) fail(ErrorCode::Parameter, "png decode: 1 or 3 channels required");
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    if (png.empty() || !png_image_begin_read_from_memory(&img, png.data(), png.size()))
        fail(ErrorCode::Protocol, std::string("png decode: ") + (png.empty() ? "empty payload" : img.message));
    img.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, raw.data(), 0, nullptr)) {
        png_image_free(&img);
        fail(ErrorCode::Protocol, std::string("png decode: ") + img.message);
    }
    Image out(static_cast<int>(img.width), static_cast<int>(img.height), channels);
    for (std::size_t i = 0; i < raw.size(); ++i) out.data[i] = static_cast<float>(raw[i]) / 255.0f;
    return out;
}

std::vector<std::uint16_t> decode_png16(const Bytes& png, int& width, int& height) {
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    if (png.empty() || !png_image_begin_read_from_memory(&img, png.data(), png.size()))
        fail(ErrorCode::Protocol, "png16 decode: invalid payload");
    img.format = PNG_FORMAT_LINEAR_Y;
    std::vector<std::uint16_t> samples(static_cast<std::size_t>(img.width) * img.height);
    if (!png_image_finish_read(&img, nullptr, samples.data(), 0, nullptr)) {
        png_image_free(&img);
        fail(ErrorCode::Protocol, std::string("png16 decode: ") + img.message);
    }
    width = static_cast<int>(img.width);
    height = static_cast<int>(img.height);
    return samples;
}

Image quantize8(const Image& image) {
    Image out = image;
    for (auto& v : out.data) v = static_cast<float>(to_byte(v)) / 255.0f;
    return out;
}

std::string base64_encode(const Bytes& bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

Bytes base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) fail(ErrorCode::Protocol, "base64: length is not a multiple of 4");
    for (char c : text)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '/' || c == '='))
            fail(ErrorCode::Protocol, "base64: invalid character");
    Bytes out(3 * text.size() / 4);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
    if (n < 0) fail(ErrorCode::Protocol, "base64: malformed input");
    std::size_t pad = 0;
    if (!text.empty() && text.back() == '=') ++pad;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path.string() + " for reading");
    Bytes out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return out;
}

void write_file(const std::filesystem::path& path, const Bytes& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

std::vector<std::uint16_t> depth_to_millimetres(const DepthMap& depth) {
    std::vector<std::uint16_t> out(depth.values.size(), 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!depth.valid[i]) continue;
        const double mm = std::round(static_cast<double>(depth.values[i]) * 1000.0);
        out[i] = static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0));
    }
    return out;
}

} // namespace scene_forge
