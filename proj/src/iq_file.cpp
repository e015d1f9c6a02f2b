// SPDX-License-Identifier: Apache-2.0
#include "nbtoa/iq_file.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace nbtoa {

namespace {

void put_f32(std::array<unsigned char, 4>& out, float v)
{
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) out[static_cast<std::size_t>(i)] = static_cast<unsigned char>(bits >> (8 * i));
}

float get_f32(const unsigned char* in)
{
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(in[i]) << (8 * i);
    return std::bit_cast<float>(bits);
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& path)
{
    auto p = path;
    p += ".json";
    return p;
}

void write_iq(const std::filesystem::path& path, const SampleBuffer& buf, const IqMetadata& meta)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    std::array<unsigned char, 4> word{};
    for (const auto& x : buf.samples) {
        put_f32(word, static_cast<float>(x.real()));
        out.write(reinterpret_cast<const char*>(word.data()), 4);
        put_f32(word, static_cast<float>(x.imag()));
        out.write(reinterpret_cast<const char*>(word.data()), 4);
    }
    if (!out) throw IoError("write failed for " + path.string());

    const nlohmann::json side = {{"format", "cf32_le"},
                                 {"sampling_rate_hz", buf.sampling_rate_hz},
                                 {"length", buf.samples.size()},
                                 {"seed", meta.seed},
                                 {"cell_id_shift", meta.cell_id_shift},
                                 {"kind", meta.kind}};
    std::ofstream js(sidecar_path(path));
    if (!js) throw IoError("cannot write " + sidecar_path(path).string());
    js << side.dump(2) << '\n';
}

SampleBuffer read_iq(const std::filesystem::path& path, IqMetadata* meta)
{
    std::ifstream js(sidecar_path(path));
    if (!js) throw IoError("missing sidecar " + sidecar_path(path).string());
    const auto side = nlohmann::json::parse(js, nullptr, false);
    if (side.is_discarded()) throw IoError("sidecar " + sidecar_path(path).string() + " is not valid JSON");

    IqMetadata m;
    try {
        if (side.value("format", std::string("cf32_le")) != "cf32_le") throw IoError("unsupported sample format");
        m.sampling_rate_hz = side.at("sampling_rate_hz").get<double>();
        m.length = side.at("length").get<std::size_t>();
        m.seed = side.value("seed", std::uint64_t{0});
        m.cell_id_shift = side.value("cell_id_shift", 0);
        m.kind = side.value("kind", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw IoError("sidecar " + sidecar_path(path).string() + " is malformed: " + e.what());
    }

    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (raw.size() % 8 != 0) throw IoError(path.string() + " is not a whole number of cf32 samples");
    if (raw.size() / 8 != m.length) {
        throw IoError(path.string() + " holds " + std::to_string(raw.size() / 8) + " samples, sidecar says " + std::to_string(m.length));
    }
    SampleBuffer buf;
    buf.sampling_rate_hz = m.sampling_rate_hz;
    buf.samples.reserve(m.length);
    for (std::size_t i = 0; i < raw.size(); i += 8) buf.samples.emplace_back(get_f32(&raw[i]), get_f32(&raw[i + 4]));
    buf.validate();
    if (meta) *meta = m;
    return buf;
}

}  // namespace nbtoa
