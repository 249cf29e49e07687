#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace karma {

// Score-percentile strata within a subreddit.
enum class Bin { VH, H, M, L };

std::string_view to_string(Bin bin);
Bin bin_from_string(std::string_view text);

struct Post {
  std::string id;
  std::string subreddit;
  std::string title;
  std::string image_url;
  std::int64_t score = 0;  // upvotes minus downvotes
  std::int64_t created_at = 0;  // unix seconds

  bool operator==(const Post&) const = default;
};

struct CorpusEntry {
  Post post;
  double percentile = 0.0;
  Bin bin = Bin::L;
  std::optional<std::int64_t> views;

  const std::string& id() const { return post.id; }
  const std::string& subreddit() const { return post.subreddit; }
  std::int64_t score() const { return post.score; }

  bool operator==(const CorpusEntry&) const = default;
};

struct ParseResult {
  std::vector<Post> posts;
  std::size_t skipped = 0;    // malformed lines
  std::size_t non_image = 0;  // well-formed but not an image post
};

// Reads line-delimited post records (keys id, subreddit, title, url, score,
// created_utc). Malformed lines are counted and skipped; input order kept.
// Throws IoError when the stream is unreadable.
ParseResult parse_posts(std::istream& in);

bool is_image_url(std::string_view url);

// Keeps, per (image_url, title), the highest scoring post; equal scores keep
// the earliest created_at. Survivors stay in first-seen order.
std::vector<Post> dedupe_reposts(const std::vector<Post>& posts);

// VH >= 0.95 > H >= 0.75 > M >= 0.50 > L. Throws ValidationError outside [0, 1].
Bin assign_bin(double percentile);

inline constexpr std::size_t kDefaultMinSubredditPosts = 100;

struct PercentileResult {
  std::vector<CorpusEntry> entries;
  std::vector<std::string> rejected_subreddits;  // below the minimum size
};

// percentile(p) = |{q in S : score(q) < score(p)}| / (N - 1), rounded to six
// decimals; the bin is assigned from the rounded value. Entries come out
// grouped by subreddit (lexicographic), input order within a subreddit.
PercentileResult compute_percentiles(const std::vector<Post>& posts,
                                     std::size_t min_posts = kDefaultMinSubredditPosts);

// Final path segment of the URL without its extension ("https://i.imgur.com/abc123.jpg" -> "abc123").
std::string image_key(std::string_view url);

using ViewCounts = std::map<std::string, std::int64_t>;

// Two-column "image_id,views" text. Duplicate ids are a ValidationError.
ViewCounts read_views(std::istream& in);

std::vector<CorpusEntry> join_views(std::vector<CorpusEntry> entries, const ViewCounts& views);

void write_corpus(std::ostream& out, const std::vector<CorpusEntry>& entries);
std::vector<CorpusEntry> read_corpus(std::istream& in);

std::vector<CorpusEntry> load_corpus_file(const std::string& path);
void save_corpus_file(const std::string& path, const std::vector<CorpusEntry>& entries);

}  // namespace karma
