//------------------------------------------------------------------------------
//
//   Copyright 2026 The finemotion Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include "finemotion/datapipe.hpp"

#include "finemotion/error.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace finemotion::data {
namespace {

constexpr char          kMagic[4] = {'F', 'M', 'D', 'S'};
constexpr std::uint32_t kVersion  = 1;

class Writer
{
public:
  explicit Writer(std::ostream &out)
    : out_(out)
  {}

  template <typename T>
  void put(T value)
  {
    // container is little-endian; every supported target is too
    out_.write(reinterpret_cast<char const *>(&value), sizeof value);
  }

  void put_string(std::string const &s)
  {
    if (s.size() > UINT16_MAX)
    {
      throw Error("range", "string too long for the dataset container");
    }
    put(static_cast<std::uint16_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

  void put_bytes(std::uint8_t const *data, std::size_t n)
  {
    out_.write(reinterpret_cast<char const *>(data), static_cast<std::streamsize>(n));
  }

private:
  std::ostream &out_;
};

class Reader
{
public:
  explicit Reader(std::istream &in)
    : in_(in)
  {}

  template <typename T>
  T get(char const *what)
  {
    T value{};
    read(reinterpret_cast<char *>(&value), sizeof value, what);
    return value;
  }

  std::string get_string(char const *what)
  {
    auto const  n = get<std::uint16_t>(what);
    std::string s(n, '\0');
    read(s.data(), n, what);
    return s;
  }

  void read(char *dst, std::size_t n, char const *what)
  {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
    {
      fail("truncated " + std::string(what));
    }
    offset_ += n;
  }

  [[noreturn]] void fail(std::string const &msg) const
  {
    throw Error("parse", "dataset container at byte " + std::to_string(offset_) + ": " + msg);
  }

  std::uint64_t offset() const noexcept
  {
    return offset_;
  }

private:
  std::istream &in_;
  std::uint64_t offset_ = 0;
};

std::uint8_t pack_presses(PressVector const &p)
{
  std::uint8_t bits = 0;
  for (std::size_t i = 0; i < kFingers; ++i)
  {
    bits |= static_cast<std::uint8_t>((p[i] ? 1u : 0u) << i);
  }
  return bits;
}

std::uint8_t to_byte(double v)
{
  double const scaled = v * 255.0;
  long const   b      = std::lround(scaled);
  if (b < 0 || b > 255 || std::abs(scaled - static_cast<double>(b)) > 1e-6)
  {
    throw Error("range", "image value is not a multiple of 1/255 in [0, 1]");
  }
  return static_cast<std::uint8_t>(b);
}

}  // namespace

void write_dataset(Dataset const &dataset, std::ostream &out)
{
  Writer w(out);
  out.write(kMagic, 4);
  w.put(kVersion);
  std::uint64_t frames = 0;
  for (auto const &s : dataset.sequences)
  {
    frames += s.size();
  }
  w.put(static_cast<std::uint32_t>(dataset.k));
  w.put(static_cast<std::uint32_t>(dataset.stride));
  w.put(static_cast<std::uint32_t>(dataset.side));
  w.put(static_cast<std::uint32_t>(dataset.sequences.size()));
  w.put(frames);
  w.put(static_cast<std::uint64_t>(dataset.windows.size()));

  for (auto const &s : dataset.sequences)
  {
    w.put_string(s.session_id);
    w.put_string(s.subject);
    w.put(static_cast<std::uint8_t>(s.task == Task::kTyping ? 1 : 0));
    w.put(static_cast<std::uint32_t>(s.size()));
    w.put(static_cast<std::uint32_t>(s.dropped));
  }
  for (auto const &win : dataset.windows)
  {
    w.put(static_cast<std::uint32_t>(win.sequence));
    w.put(static_cast<std::uint32_t>(win.start));
  }

  std::size_t const         pixels = dataset.side * dataset.side;
  std::uint32_t const       record = 4 + 4 + 1 + 4 * kin::kJointCount + static_cast<std::uint32_t>(pixels);
  std::vector<std::uint8_t> bytes(pixels);
  for (std::size_t q = 0; q < dataset.sequences.size(); ++q)
  {
    auto const &s = dataset.sequences[q];
    for (std::size_t i = 0; i < s.size(); ++i)
    {
      if (s.images[i].size() != pixels)
      {
        throw Error("shape", "sequence '" + s.session_id + "' frame " + std::to_string(i) +
                                 " does not have side*side pixels");
      }
      w.put(record);
      w.put(static_cast<std::uint32_t>(q));
      w.put(static_cast<float>(s.times[i]));
      w.put(pack_presses(s.presses[i]));
      for (double c : s.configs[i])
      {
        w.put(static_cast<float>(c));
      }
      for (std::size_t p = 0; p < pixels; ++p)
      {
        bytes[p] = to_byte(s.images[i][p]);
      }
      w.put_bytes(bytes.data(), pixels);
    }
  }
  if (!out)
  {
    throw Error("io", "failed writing dataset container");
  }
}

Dataset read_dataset(std::istream &in)
{
  Reader r(in);
  char   magic[4];
  r.read(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
  {
    throw Error("parse", "dataset container at byte 0: bad magic");
  }
  if (auto const v = r.get<std::uint32_t>("version"); v != kVersion)
  {
    r.fail("unsupported version " + std::to_string(v));
  }
  Dataset ds;
  ds.k                 = r.get<std::uint32_t>("header");
  ds.stride            = r.get<std::uint32_t>("header");
  ds.side              = r.get<std::uint32_t>("header");
  auto const n_seq     = r.get<std::uint32_t>("header");
  auto const n_frames  = r.get<std::uint64_t>("header");
  auto const n_windows = r.get<std::uint64_t>("header");
  if (ds.k == 0 || ds.stride == 0 || ds.side == 0 || ds.side > 4096)
  {
    r.fail("invalid header values");
  }

  std::vector<std::size_t> expected(n_seq);
  std::uint64_t            total = 0;
  ds.sequences.resize(n_seq);
  for (std::uint32_t q = 0; q < n_seq; ++q)
  {
    auto &s      = ds.sequences[q];
    s.session_id = r.get_string("session id");
    s.subject    = r.get_string("subject");
    auto const t = r.get<std::uint8_t>("task");
    if (t > 1)
    {
      r.fail("unknown task code " + std::to_string(t));
    }
    s.task      = t == 1 ? Task::kTyping : Task::kPiano;
    expected[q] = r.get<std::uint32_t>("frame count");
    s.dropped   = r.get<std::uint32_t>("dropped count");
    total += expected[q];
  }
  if (total != n_frames)
  {
    r.fail("session frame counts do not sum to the header frame count");
  }
  for (std::uint64_t i = 0; i < n_windows; ++i)
  {
    WindowRef w;
    w.sequence = r.get<std::uint32_t>("window");
    w.start    = r.get<std::uint32_t>("window");
    if (w.sequence >= n_seq || w.start + ds.k > expected[w.sequence])
    {
      r.fail("window " + std::to_string(i) + " lies outside its sequence");
    }
    ds.windows.push_back(w);
  }

  std::size_t const   pixels = ds.side * ds.side;
  std::uint32_t const record = 4 + 4 + 1 + 4 * kin::kJointCount + static_cast<std::uint32_t>(pixels);
  std::vector<char>   bytes(pixels);
  for (std::uint64_t f = 0; f < n_frames; ++f)
  {
    if (r.get<std::uint32_t>("record length") != record)
    {
      r.fail("record length does not match the header");
    }
    auto const q = r.get<std::uint32_t>("record");
    if (q >= n_seq || ds.sequences[q].size() >= expected[q])
    {
      r.fail("record refers to sequence " + std::to_string(q) + " beyond its frame count");
    }
    auto &s = ds.sequences[q];
    s.times.push_back(r.get<float>("record"));
    auto const  bits = r.get<std::uint8_t>("record");
    PressVector p{};
    for (std::size_t i = 0; i < kFingers; ++i)
    {
      p[i] = (bits >> i) & 1u;
    }
    s.presses.push_back(p);
    std::array<double, kin::kJointCount> c{};
    for (auto &v : c)
    {
      v = r.get<float>("record");
    }
    s.configs.push_back(c);
    r.read(bytes.data(), pixels, "pixels");
    std::vector<double> img(pixels);
    for (std::size_t i = 0; i < pixels; ++i)
    {
      img[i] = static_cast<double>(static_cast<std::uint8_t>(bytes[i])) / 255.0;
    }
    s.images.push_back(std::move(img));
  }
  if (in.peek() != std::char_traits<char>::eof())
  {
    r.fail("trailing bytes after the last record");
  }
  return ds;
}

void save_dataset(Dataset const &dataset, std::filesystem::path const &path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw Error("io", "cannot open '" + path.string() + "' for writing");
  }
  write_dataset(dataset, out);
}

Dataset load_dataset(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw Error("io", "cannot open '" + path.string() + "' for reading");
  }
  return read_dataset(in);
}

}  // namespace finemotion::data
