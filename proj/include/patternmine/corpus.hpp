#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace patternmine {

enum class ShardFormat { plain_text, jsonl_text_field };

struct CorpusShard {
  std::uint64_t shard_id = 0;
  std::filesystem::path path;
  ShardFormat format = ShardFormat::plain_text;
};

/// Format from the extension: ".jsonl" and ".json" are JSONL with a "text"
/// field, ".txt" and ".text" hold one document per line.
std::optional<ShardFormat> shard_format_for(const std::filesystem::path& path);

/// Regular files of a recognised format in `dir`, sorted by file name;
/// shard_id is the position in that order. Throws Error(ShardIOError) if the
/// directory is unreadable or holds no shards.
std::vector<CorpusShard> list_shards(const std::filesystem::path& dir);

struct Document {
  std::uint64_t doc_index = 0;  // line number within the shard, from 0
  std::string_view text;        // valid until the next call to next()
};

/// Streams one shard's documents in file order using a fixed-size read buffer.
/// Malformed JSONL records are skipped and counted; blank JSONL lines are
/// skipped silently.
class DocumentStream {
 public:
  explicit DocumentStream(const CorpusShard& shard, std::size_t buffer_size = 1 << 20);

  /// Fills `doc` and returns true, or returns false at end of shard.
  /// Throws Error(ShardIOError) on read failure.
  bool next(Document& doc);

  std::uint64_t malformed_count() const { return malformed_; }
  std::uint64_t bytes_read() const { return bytes_read_; }

 private:
  bool next_line(std::string_view& line);

  CorpusShard shard_;
  std::ifstream in_;
  std::vector<char> buffer_;
  std::size_t begin_ = 0;
  std::size_t end_ = 0;
  bool eof_ = false;
  std::string carry_;
  std::string decoded_;
  std::uint64_t line_index_ = 0;
  std::uint64_t malformed_ = 0;
  std::uint64_t bytes_read_ = 0;
};

}  // namespace patternmine
