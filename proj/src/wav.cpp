#include "tonelab/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace tonelab {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char>& v, std::uint32_t x) {
  v.push_back(x & 0xFF);
  v.push_back((x >> 8) & 0xFF);
  v.push_back((x >> 16) & 0xFF);
  v.push_back((x >> 24) & 0xFF);
}

void put_u16(std::vector<unsigned char>& v, std::uint16_t x) {
  v.push_back(x & 0xFF);
  v.push_back((x >> 8) & 0xFF);
}

}  // namespace

AudioClip load_audio(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw wav_io_error("cannot open file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw wav_io_error("read failure: " + path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw wav_format_error("not a RIFF/WAVE file: " + path);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;
  bool have_fmt = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const std::uint32_t chunk_len = read_u32(hdr + 4);
    const unsigned char* body = hdr + 8;
    if (pos + 8 + chunk_len > bytes.size())
      throw wav_format_error("truncated chunk in " + path);
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw wav_format_error("short fmt chunk in " + path);
      format = read_u16(body);
      channels = read_u16(body + 2);
      rate = read_u32(body + 4);
      bits = read_u16(body + 14);
      if (format == kFormatExtensible && chunk_len >= 40)
        format = read_u16(body + 24);  // first word of the subformat GUID
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = body;
      data_len = chunk_len;
    }
    pos += 8 + chunk_len + (chunk_len & 1);
  }

  if (!have_fmt || !data) throw wav_format_error("missing fmt or data chunk: " + path);
  if (channels != 1 && channels != 2)
    throw wav_format_error("unsupported channel count in " + path);
  if (rate == 0) throw wav_format_error("zero sample rate in " + path);
  const bool ok = (format == kFormatPcm && (bits == 16 || bits == 24)) ||
                  (format == kFormatFloat && bits == 32);
  if (!ok) throw wav_format_error("unsupported encoding in " + path);

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t n = data_len / bytes_per_sample;
  if (n == 0) throw wav_empty_error("zero-length audio in " + path);

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.channels = channels;
  clip.samples.resize(n);
  if (format == kFormatFloat) {
    for (std::size_t i = 0; i < n; ++i) {
      float f;
      std::memcpy(&f, data + 4 * i, 4);
      clip.samples[i] = static_cast<double>(f);
    }
  } else if (bits == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::int16_t s = static_cast<std::int16_t>(
          data[2 * i] | (data[2 * i + 1] << 8));
      clip.samples[i] = s / 32768.0;
    }
  } else {  // 24-bit
    for (std::size_t i = 0; i < n; ++i) {
      std::int32_t s = data[3 * i] | (data[3 * i + 1] << 8) |
                       (data[3 * i + 2] << 16);
      if (s & 0x800000) s |= ~0xFFFFFF;  // sign extend
      clip.samples[i] = s / 8388608.0;
    }
  }
  return clip;
}

void save_audio(const std::string& path, const AudioClip& clip, int bits) {
  if (bits != 16 && bits != 32)
    throw wav_format_error("save_audio: bits must be 16 or 32");
  const std::uint16_t format = bits == 32 ? kFormatFloat : kFormatPcm;
  const std::size_t n = clip.samples.size();
  const std::size_t data_len = n * (bits / 8);

  std::vector<unsigned char> out;
  out.reserve(44 + data_len);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, static_cast<std::uint32_t>(36 + data_len));
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, format);
  put_u16(out, static_cast<std::uint16_t>(clip.channels));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  const std::uint32_t block = clip.channels * bits / 8;
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * block);
  put_u16(out, static_cast<std::uint16_t>(block));
  put_u16(out, static_cast<std::uint16_t>(bits));
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, static_cast<std::uint32_t>(data_len));

  if (bits == 32) {
    for (double s : clip.samples) {
      float f = static_cast<float>(s);
      unsigned char b[4];
      std::memcpy(b, &f, 4);
      out.insert(out.end(), b, b + 4);
    }
  } else {
    for (double s : clip.samples) {
      const double clamped = std::clamp(s, -1.0, 1.0);
      const std::int16_t q = static_cast<std::int16_t>(
          std::lround(clamped * 32767.0));
      put_u16(out, static_cast<std::uint16_t>(q));
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw wav_io_error("cannot write file: " + path);
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw wav_io_error("write failure: " + path);
}

}  // namespace tonelab
