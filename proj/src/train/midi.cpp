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

#include "finemotion/error.hpp"
#include "finemotion/replay.hpp"

#include <algorithm>
#include <map>

namespace finemotion::replay {
namespace {

void put_be(std::vector<std::uint8_t> &out, std::uint32_t value, int bytes)
{
  for (int i = bytes - 1; i >= 0; --i)
  {
    out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
}

void put_vlq(std::vector<std::uint8_t> &out, std::uint32_t value)
{
  std::uint8_t buf[5];
  int          n = 0;
  buf[n++]       = value & 0x7F;
  while (value >>= 7)
  {
    buf[n++] = static_cast<std::uint8_t>(0x80 | (value & 0x7F));
  }
  while (n > 0)
  {
    out.push_back(buf[--n]);
  }
}

class Cursor
{
public:
  Cursor(std::vector<std::uint8_t> const &bytes, std::size_t begin, std::size_t end)
    : bytes_(bytes)
    , pos_(begin)
    , end_(end)
  {}

  bool done() const
  {
    return pos_ >= end_;
  }
  std::size_t pos() const
  {
    return pos_;
  }
  std::uint8_t peek() const
  {
    need(1);
    return bytes_[pos_];
  }
  std::uint8_t byte()
  {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t be(int n)
  {
    std::uint32_t v = 0;
    for (int i = 0; i < n; ++i)
    {
      v = (v << 8) | byte();
    }
    return v;
  }
  std::uint32_t vlq()
  {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
    {
      std::uint8_t const b = byte();
      v                    = (v << 7) | (b & 0x7F);
      if (!(b & 0x80))
      {
        return v;
      }
    }
    fail("variable-length quantity longer than 4 bytes");
  }
  void skip(std::size_t n)
  {
    need(n);
    pos_ += n;
  }
  [[noreturn]] void fail(std::string const &msg) const
  {
    throw Error("parse", "MIDI at byte " + std::to_string(pos_) + ": " + msg);
  }

private:
  void need(std::size_t n) const
  {
    if (pos_ + n > end_)
    {
      fail("unexpected end of data");
    }
  }

  std::vector<std::uint8_t> const &bytes_;
  std::size_t                      pos_, end_;
};

}  // namespace

std::vector<std::uint8_t> write_midi(std::vector<NoteEvent> const &notes)
{
  struct Message
  {
    std::uint32_t tick;
    int           order;  // note-offs before note-ons at one tick
    std::uint8_t  status, note;
  };
  std::vector<Message> messages;
  for (auto const &n : notes)
  {
    if (n.note < 0 || n.note > 127 || n.off_tick <= n.on_tick)
    {
      throw Error("range", "note events need a MIDI note number and off_tick > on_tick");
    }
    messages.push_back({n.on_tick, 1, 0x90, static_cast<std::uint8_t>(n.note)});
    messages.push_back({n.off_tick, 0, 0x80, static_cast<std::uint8_t>(n.note)});
  }
  std::stable_sort(messages.begin(), messages.end(), [](auto const &a, auto const &b) {
    return a.tick != b.tick ? a.tick < b.tick : a.order < b.order;
  });

  std::vector<std::uint8_t> track;
  put_vlq(track, 0);
  track.insert(track.end(), {0xFF, 0x51, 0x03});
  put_be(track, kTempo, 3);
  std::uint32_t last = 0;
  for (auto const &m : messages)
  {
    put_vlq(track, m.tick - last);
    last = m.tick;
    track.insert(track.end(), {m.status, m.note, 64});
  }
  put_vlq(track, 0);
  track.insert(track.end(), {0xFF, 0x2F, 0x00});

  std::vector<std::uint8_t> out{'M', 'T', 'h', 'd'};
  put_be(out, 6, 4);
  put_be(out, 0, 2);  // format 0
  put_be(out, 1, 2);  // one track
  put_be(out, kDivision, 2);
  out.insert(out.end(), {'M', 'T', 'r', 'k'});
  put_be(out, static_cast<std::uint32_t>(track.size()), 4);
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

std::vector<NoteEvent> read_midi(std::vector<std::uint8_t> const &bytes)
{
  Cursor head(bytes, 0, bytes.size());
  if (head.be(4) != 0x4D546864)  // "MThd"
  {
    head.fail("missing MThd header");
  }
  std::uint32_t const header_len = head.be(4);
  std::uint32_t const format     = head.be(2);
  std::uint32_t const tracks     = head.be(2);
  std::uint32_t const division   = head.be(2);
  if (header_len < 6 || format > 1 || (division & 0x8000) != 0)
  {
    head.fail("only format 0/1 files with ticks-per-quarter timing are supported");
  }
  if (division != kDivision)
  {
    head.fail("division " + std::to_string(division) + " differs from " + std::to_string(kDivision));
  }
  head.skip(header_len - 6);

  std::vector<NoteEvent> out;
  for (std::uint32_t t = 0; t < tracks; ++t)
  {
    if (head.be(4) != 0x4D54726B)  // "MTrk"
    {
      head.fail("missing MTrk chunk");
    }
    std::uint32_t const len   = head.be(4);
    std::size_t const   begin = head.pos();
    head.skip(len);
    Cursor        c(bytes, begin, begin + len);
    std::uint32_t tick    = 0;
    std::uint8_t  running = 0;
    std::map<int, std::vector<std::uint32_t>> open;  // note -> pending on ticks
    while (!c.done())
    {
      tick += c.vlq();
      std::uint8_t status = c.peek();
      if (status & 0x80)
      {
        c.byte();
      }
      else if (running == 0)
      {
        c.fail("data byte without running status");
      }
      else
      {
        status = running;
      }
      if (status == 0xFF)
      {
        std::uint8_t const type = c.byte();
        c.skip(c.vlq());
        if (type == 0x2F)
        {
          break;
        }
        continue;
      }
      if (status == 0xF0 || status == 0xF7)
      {
        c.skip(c.vlq());
        continue;
      }
      running             = status;
      std::uint8_t const kind = status & 0xF0;
      std::uint8_t const a    = c.byte();
      std::uint8_t const b    = (kind == 0xC0 || kind == 0xD0) ? 0 : c.byte();
      bool const on  = kind == 0x90 && b > 0;
      bool const off = kind == 0x80 || (kind == 0x90 && b == 0);
      if (on)
      {
        open[a].push_back(tick);
      }
      else if (off)
      {
        auto &pending = open[a];
        if (pending.empty())
        {
          c.fail("note-off without a matching note-on");
        }
        out.push_back({a, pending.front(), tick});
        pending.erase(pending.begin());
      }
    }
    for (auto const &[note, pending] : open)
    {
      if (!pending.empty())
      {
        c.fail("note " + std::to_string(note) + " never released");
      }
    }
  }
  std::sort(out.begin(), out.end(), [](auto const &a, auto const &b) {
    return a.on_tick != b.on_tick ? a.on_tick < b.on_tick : a.note < b.note;
  });
  return out;
}

}  // namespace finemotion::replay
