/// @file
/// @brief SMF format 0/1 reader and writer.

#include "mididedup/midi.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "mididedup/parallel.h"

namespace mididedup {
namespace {

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, std::size_t pos, std::size_t end)
      : data_(data), pos_(pos), end_(end) {}

  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ >= end_; }

  std::uint8_t u8() {
    if (pos_ >= end_) throw MidiParseError("unexpected end of track data", pos_);
    return data_[pos_++];
  }
  std::uint8_t peek() const {
    if (pos_ >= end_) throw MidiParseError("unexpected end of track data", pos_);
    return data_[pos_];
  }
  std::uint32_t vlq() {
    const std::size_t start = pos_;
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint8_t b = u8();
      value = (value << 7) | (b & 0x7F);
      if ((b & 0x80) == 0) return value;
    }
    throw MidiParseError("variable-length quantity longer than 4 bytes", start);
  }
  void skip(std::size_t n) {
    if (n > end_ - pos_) throw MidiParseError("event runs past end of track", pos_);
    pos_ += n;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    const std::size_t start = pos_;
    skip(n);
    return data_.subspan(start, n);
  }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_;
  std::size_t end_;
};

std::uint32_t be32(std::span<const std::uint8_t> d, std::size_t at) {
  return (std::uint32_t{d[at]} << 24) | (std::uint32_t{d[at + 1]} << 16) |
         (std::uint32_t{d[at + 2]} << 8) | std::uint32_t{d[at + 3]};
}
std::uint16_t be16(std::span<const std::uint8_t> d, std::size_t at) {
  return static_cast<std::uint16_t>((d[at] << 8) | d[at + 1]);
}

struct TimedTempo {
  Tick tick;
  int track;
  int seq;
  double bpm;
};
struct TimedMeter {
  Tick tick;
  int track;
  int seq;
  int numerator;
  int denominator;
};

struct ActiveNote {
  Tick onset;
  int velocity;
  int program;
};

struct TrackParser {
  int track_index;
  std::vector<NoteEvent>& notes;
  std::vector<TimedTempo>& tempos;
  std::vector<TimedMeter>& meters;

  std::array<std::array<std::optional<ActiveNote>, 128>, 16> active{};
  std::array<int, 16> programs{};
  int seq = 0;

  void close(int channel, int pitch, Tick tick) {
    auto& slot = active[channel][pitch];
    if (!slot) return;
    if (tick > slot->onset) {
      notes.push_back(NoteEvent{slot->onset, tick - slot->onset, pitch, slot->velocity,
                                slot->program, channel == 9, track_index});
    }
    slot.reset();
  }

  void run(ByteReader& in) {
    Tick tick = 0;
    std::uint8_t running = 0;
    while (!in.done()) {
      tick += in.vlq();
      const std::size_t status_pos = in.pos();
      std::uint8_t status = in.peek();
      if (status & 0x80) {
        in.u8();
      } else if (running) {
        status = running;
      } else {
        throw MidiParseError("data byte without running status", status_pos);
      }

      if (status == 0xFF) {
        running = 0;
        const std::uint8_t type = in.u8();
        const std::uint32_t len = in.vlq();
        const auto payload = in.take(len);
        if (type == 0x2F) break;
        if (type == 0x51 && len >= 3) {
          const std::uint32_t uspq = (payload[0] << 16) | (payload[1] << 8) | payload[2];
          if (uspq > 0) tempos.push_back({tick, track_index, seq++, 60'000'000.0 / uspq});
        } else if (type == 0x58 && len >= 2) {
          const int num = payload[0];
          const int pow2 = payload[1];
          // Meters outside 1/1..x/32 are skipped rather than approximated.
          if (num >= 1 && pow2 <= 5) meters.push_back({tick, track_index, seq++, num, 1 << pow2});
        }
        continue;
      }
      if (status == 0xF0 || status == 0xF7) {
        running = 0;
        in.skip(in.vlq());
        continue;
      }
      if (status > 0xF0) throw MidiParseError("unexpected system status byte", status_pos);

      running = status;
      const int kind = status & 0xF0;
      const int channel = status & 0x0F;
      const int n_data = (kind == 0xC0 || kind == 0xD0) ? 1 : 2;
      std::array<int, 2> data{};
      for (int i = 0; i < n_data; ++i) {
        const std::size_t at = in.pos();
        const std::uint8_t b = in.u8();
        if (b & 0x80) throw MidiParseError("status byte inside channel message", at);
        data[i] = b;
      }
      switch (kind) {
        case 0x90:
          if (data[1] > 0) {
            close(channel, data[0], tick);  // last note-on wins
            active[channel][data[0]] = ActiveNote{tick, data[1], programs[channel]};
            break;
          }
          [[fallthrough]];
        case 0x80:
          close(channel, data[0], tick);
          break;
        case 0xC0:
          programs[channel] = data[0];
          break;
        default:
          break;
      }
    }
    for (int ch = 0; ch < 16; ++ch) {
      for (int p = 0; p < 128; ++p) close(ch, p, tick);
    }
  }
};

void write_vlq(std::vector<std::uint8_t>& out, std::uint32_t v) {
  std::uint8_t buf[5];
  int n = 0;
  buf[n++] = v & 0x7F;
  while (v >>= 7) buf[n++] = static_cast<std::uint8_t>((v & 0x7F) | 0x80);
  while (n) out.push_back(buf[--n]);
}

void write_chunk(std::vector<std::uint8_t>& out, const char* tag,
                 const std::vector<std::uint8_t>& body) {
  out.insert(out.end(), tag, tag + 4);
  const auto len = static_cast<std::uint32_t>(body.size());
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(len >> s));
  out.insert(out.end(), body.begin(), body.end());
}

struct RawEvent {
  Tick tick;
  int order;  // note-offs before note-ons at the same tick
  std::vector<std::uint8_t> bytes;
};

std::vector<std::uint8_t> encode_track(std::vector<RawEvent> events) {
  std::stable_sort(events.begin(), events.end(), [](const RawEvent& a, const RawEvent& b) {
    return std::tie(a.tick, a.order) < std::tie(b.tick, b.order);
  });
  std::vector<std::uint8_t> body;
  Tick last = 0;
  for (const auto& e : events) {
    write_vlq(body, static_cast<std::uint32_t>(e.tick - last));
    last = e.tick;
    body.insert(body.end(), e.bytes.begin(), e.bytes.end());
  }
  write_vlq(body, 0);
  body.insert(body.end(), {0xFF, 0x2F, 0x00});
  return body;
}

int log2_exact(int v) {
  int p = 0;
  while ((1 << p) < v) ++p;
  return p;
}

std::string_view status_name(ParseStatus s) { return s == ParseStatus::kOk ? "ok" : "failed"; }

}  // namespace

void normalize(Piece& piece) {
  std::sort(piece.notes.begin(), piece.notes.end());
  if (piece.tempo_map.empty() || piece.tempo_map.front().tick != 0) {
    piece.tempo_map.insert(piece.tempo_map.begin(), TempoChange{0, 120.0});
  }
  if (piece.time_signatures.empty() || piece.time_signatures.front().tick != 0) {
    piece.time_signatures.insert(piece.time_signatures.begin(), TimeSignature{0, 4, 4});
  }
}

Piece parse_midi(std::span<const std::uint8_t> bytes, const FileId& id) {
  if (bytes.size() < 14) throw MidiParseError("file shorter than a header chunk", bytes.size());
  if (std::memcmp(bytes.data(), "MThd", 4) != 0) throw MidiParseError("missing MThd", 0);
  const std::uint32_t header_len = be32(bytes, 4);
  if (header_len < 6) throw MidiParseError("header chunk too short", 4);
  if (bytes.size() - 8 < header_len) throw MidiParseError("truncated header chunk", bytes.size());
  const int format = be16(bytes, 8);
  const int n_tracks = be16(bytes, 10);
  const std::uint16_t division = be16(bytes, 12);
  if (format == 2) throw MidiParseError("format 2 files are not supported", 8);
  if (format > 2) throw MidiParseError("unknown SMF format " + std::to_string(format), 8);
  if (division & 0x8000) throw MidiParseError("SMPTE time division is not supported", 12);
  if (division == 0) throw MidiParseError("zero ticks per quarter", 12);

  Piece piece;
  piece.id = id;
  piece.ticks_per_quarter = division;
  std::vector<TimedTempo> tempos;
  std::vector<TimedMeter> meters;

  std::size_t pos = 8 + header_len;
  int track = 0;
  while (track < n_tracks) {
    if (bytes.size() - pos < 8) throw MidiParseError("missing track chunk", pos);
    const std::uint32_t len = be32(bytes, pos + 4);
    const bool is_track = std::memcmp(bytes.data() + pos, "MTrk", 4) == 0;
    const std::size_t body = pos + 8;
    if (bytes.size() - body < len) throw MidiParseError("truncated track chunk", pos);
    if (is_track) {
      ByteReader reader(bytes, body, body + len);
      TrackParser parser{track, piece.notes, tempos, meters};
      parser.run(reader);
      ++track;
    }
    pos = body + len;
  }

  auto by_time = [](const auto& a, const auto& b) {
    return std::tie(a.tick, a.track, a.seq) < std::tie(b.tick, b.track, b.seq);
  };
  std::sort(tempos.begin(), tempos.end(), by_time);
  std::sort(meters.begin(), meters.end(), by_time);
  for (const auto& t : tempos) {
    if (!piece.tempo_map.empty() && piece.tempo_map.back().tick == t.tick) {
      piece.tempo_map.back().bpm = t.bpm;
    } else {
      piece.tempo_map.push_back({t.tick, t.bpm});
    }
  }
  for (const auto& m : meters) {
    if (!piece.time_signatures.empty() && piece.time_signatures.back().tick == m.tick) {
      piece.time_signatures.back() = {m.tick, m.numerator, m.denominator};
    } else {
      piece.time_signatures.push_back({m.tick, m.numerator, m.denominator});
    }
  }
  normalize(piece);
  return piece;
}

Piece parse_midi_file(const std::filesystem::path& path, const FileId& id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MidiParseError("cannot open " + path.string(), 0);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_midi(bytes, id);
}

std::string dump_piece(const Piece& piece) {
  std::ostringstream out;
  out << "id " << piece.id << '\n';
  out << "tpq " << piece.ticks_per_quarter << '\n';
  char buf[64];
  for (const auto& t : piece.tempo_map) {
    std::snprintf(buf, sizeof buf, "%.17g", t.bpm);
    out << "tempo " << t.tick << ' ' << buf << '\n';
  }
  for (const auto& m : piece.time_signatures) {
    out << "meter " << m.tick << ' ' << m.numerator << ' ' << m.denominator << '\n';
  }
  for (const auto& n : piece.notes) {
    out << "note " << n.onset << ' ' << n.duration << ' ' << n.pitch << ' ' << n.velocity << ' '
        << n.program << ' ' << (n.is_drum ? 1 : 0) << ' ' << n.track_index << '\n';
  }
  return out.str();
}

Piece read_piece_dump(std::string_view text) {
  Piece piece;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto space = line.find(' ');
    const std::string key = line.substr(0, space);
    const std::string rest = space == std::string::npos ? "" : line.substr(space + 1);
    std::istringstream fields(rest);
    if (key == "id") {
      piece.id = rest;
      continue;
    }
    bool ok = true;
    if (key == "tpq") {
      ok = static_cast<bool>(fields >> piece.ticks_per_quarter);
    } else if (key == "tempo") {
      TempoChange t;
      std::string bpm;
      ok = static_cast<bool>(fields >> t.tick >> bpm);
      if (ok) t.bpm = std::strtod(bpm.c_str(), nullptr);
      piece.tempo_map.push_back(t);
    } else if (key == "meter") {
      TimeSignature m;
      ok = static_cast<bool>(fields >> m.tick >> m.numerator >> m.denominator);
      piece.time_signatures.push_back(m);
    } else if (key == "note") {
      NoteEvent n;
      int drum = 0;
      ok = static_cast<bool>(fields >> n.onset >> n.duration >> n.pitch >> n.velocity >>
                             n.program >> drum >> n.track_index);
      n.is_drum = drum != 0;
      piece.notes.push_back(n);
    } else {
      ok = false;
    }
    if (!ok) throw std::runtime_error("bad piece dump line " + std::to_string(line_no));
  }
  return piece;
}

std::vector<std::uint8_t> write_midi(const Piece& piece, std::span<const MidiTrackMeta> meta) {
  using Group = std::tuple<int, bool, int>;  // track_index, is_drum, program
  std::map<Group, std::vector<const NoteEvent*>> groups;
  for (const auto& n : piece.notes) groups[{n.track_index, n.is_drum, n.program}].push_back(&n);

  std::vector<std::vector<std::uint8_t>> bodies;

  std::vector<RawEvent> conductor;
  for (const auto& m : piece.time_signatures) {
    conductor.push_back({m.tick, 0,
                         {0xFF, 0x58, 0x04, static_cast<std::uint8_t>(m.numerator),
                          static_cast<std::uint8_t>(log2_exact(m.denominator)), 24, 8}});
  }
  for (const auto& t : piece.tempo_map) {
    const auto uspq = static_cast<std::uint32_t>(std::lround(60'000'000.0 / t.bpm));
    conductor.push_back({t.tick, 1,
                         {0xFF, 0x51, 0x03, static_cast<std::uint8_t>(uspq >> 16),
                          static_cast<std::uint8_t>(uspq >> 8), static_cast<std::uint8_t>(uspq)}});
  }
  bodies.push_back(encode_track(std::move(conductor)));

  int next_channel = 0;
  std::size_t group_no = 0;
  for (const auto& [key, notes] : groups) {
    const auto& [track_index, is_drum, program] = key;
    int channel = 9;
    if (!is_drum) {
      channel = next_channel;
      next_channel = (next_channel + 1) % 16;
      if (next_channel == 9) next_channel = 10;
    }
    std::vector<RawEvent> events;
    if (!meta.empty()) {
      const auto& name = meta[group_no % meta.size()].name;
      std::vector<std::uint8_t> ev{0xFF, 0x03};
      write_vlq(ev, static_cast<std::uint32_t>(name.size()));
      ev.insert(ev.end(), name.begin(), name.end());
      events.push_back({0, -2, std::move(ev)});
    }
    events.push_back({0, -1,
                      {static_cast<std::uint8_t>(0xC0 | channel),
                       static_cast<std::uint8_t>(program)}});
    for (const NoteEvent* n : notes) {
      const auto pitch = static_cast<std::uint8_t>(n->pitch);
      events.push_back({n->onset, 1,
                        {static_cast<std::uint8_t>(0x90 | channel), pitch,
                         static_cast<std::uint8_t>(n->velocity)}});
      events.push_back({n->onset + n->duration, 0,
                        {static_cast<std::uint8_t>(0x80 | channel), pitch, 0}});
    }
    bodies.push_back(encode_track(std::move(events)));
    ++group_no;
  }

  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> header{0, 1};
  header.push_back(static_cast<std::uint8_t>(bodies.size() >> 8));
  header.push_back(static_cast<std::uint8_t>(bodies.size()));
  header.push_back(static_cast<std::uint8_t>(piece.ticks_per_quarter >> 8));
  header.push_back(static_cast<std::uint8_t>(piece.ticks_per_quarter));
  write_chunk(out, "MThd", header);
  for (const auto& body : bodies) write_chunk(out, "MTrk", body);
  return out;
}

std::size_t CorpusIndex::failed_count() const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto& e) {
    return e.status == ParseStatus::kFailed;
  }));
}

std::vector<FileId> list_midi_files(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw std::runtime_error("cannot read corpus root " + root.string());
  std::vector<FileId> ids;
  fs::recursive_directory_iterator it(root, fs::directory_options::follow_directory_symlink, ec);
  if (ec) throw std::runtime_error("cannot read corpus root " + root.string() + ": " + ec.message());
  for (const auto& entry : it) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext != ".mid" && ext != ".midi") continue;
    ids.push_back(fs::relative(entry.path(), root).generic_string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

CorpusIndex scan_corpus(const std::filesystem::path& root, int threads) {
  CorpusIndex index;
  index.root = root;
  const auto ids = list_midi_files(root);
  index.entries.resize(ids.size());
  parallel_for(ids.size(), threads, [&](std::size_t i) {
    CorpusEntry& e = index.entries[i];
    e.id = ids[i];
    const auto path = root / ids[i];
    std::error_code ec;
    e.byte_size = std::filesystem::file_size(path, ec);
    try {
      e.note_count = total_note_count(parse_midi_file(path, ids[i]));
      e.status = ParseStatus::kOk;
    } catch (const MidiParseError& err) {
      e.status = ParseStatus::kFailed;
      e.error = err.what();
    }
  });
  return index;
}

std::string index_to_json(const CorpusIndex& index) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& e : index.entries) {
    nlohmann::ordered_json rec;
    rec["id"] = e.id;
    rec["bytes"] = e.byte_size;
    rec["notes"] = e.note_count;
    rec["status"] = status_name(e.status);
    if (!e.error.empty()) rec["error"] = e.error;
    arr.push_back(std::move(rec));
  }
  return arr.dump(1) + "\n";
}

CorpusIndex index_from_json(std::string_view text, const std::filesystem::path& root) {
  const auto arr = nlohmann::json::parse(text);
  CorpusIndex index;
  index.root = root;
  for (const auto& rec : arr) {
    CorpusEntry e;
    e.id = rec.at("id").get<std::string>();
    e.byte_size = rec.at("bytes").get<std::uintmax_t>();
    e.note_count = rec.at("notes").get<std::size_t>();
    e.status = rec.at("status").get<std::string>() == "ok" ? ParseStatus::kOk : ParseStatus::kFailed;
    if (rec.contains("error")) e.error = rec["error"].get<std::string>();
    index.entries.push_back(std::move(e));
  }
  return index;
}

}  // namespace mididedup
