#include "karma/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "karma/error.hpp"
#include "karma/io.hpp"

namespace karma {

using nlohmann::json;

std::string_view to_string(Bin bin) {
  switch (bin) {
    case Bin::VH: return "VH";
    case Bin::H: return "H";
    case Bin::M: return "M";
    case Bin::L: return "L";
  }
  return "?";
}

Bin bin_from_string(std::string_view text) {
  if (text == "VH") return Bin::VH;
  if (text == "H") return Bin::H;
  if (text == "M") return Bin::M;
  if (text == "L") return Bin::L;
  throw ValidationError("unknown bin '" + std::string(text) + "'");
}

bool is_image_url(std::string_view url) {
  std::string lower(url);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  const auto query = lower.find_first_of("?#");
  if (query != std::string::npos) lower.resize(query);
  for (std::string_view ext : {".jpg", ".jpeg", ".png", ".gif", ".webp"}) {
    if (lower.size() >= ext.size() && lower.compare(lower.size() - ext.size(), ext.size(), ext) == 0) return true;
  }
  // Bare imgur links ("imgur.com/abc123") host a single image.
  return lower.find("imgur.com/") != std::string::npos && lower.find("/a/") == std::string::npos &&
         lower.find("/gallery/") == std::string::npos;
}

namespace {

std::optional<Post> post_from_record(const json& record) {
  if (!record.is_object()) return std::nullopt;
  auto string_field = [&](const char* key) -> const std::string* {
    auto it = record.find(key);
    if (it == record.end() || !it->is_string()) return nullptr;
    return it->get_ptr<const std::string*>();
  };
  auto int_field = [&](const char* key) -> std::optional<std::int64_t> {
    auto it = record.find(key);
    if (it == record.end() || !it->is_number_integer()) return std::nullopt;
    return it->get<std::int64_t>();
  };
  const auto* id = string_field("id");
  const auto* subreddit = string_field("subreddit");
  const auto* title = string_field("title");
  const auto* url = string_field("url");
  const auto score = int_field("score");
  const auto created = int_field("created_utc");
  if (!id || !subreddit || !title || !url || !score || !created) return std::nullopt;
  if (title->empty() || id->empty() || subreddit->empty()) return std::nullopt;
  return Post{*id, *subreddit, *title, *url, *score, *created};
}

}  // namespace

ParseResult parse_posts(std::istream& in) {
  if (!in) throw IoError("post stream is not readable");
  ParseResult result;
  std::string line;
  while (std::getline(in, line)) {
    if (io::trim(line).empty()) continue;
    const json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded()) {
      ++result.skipped;
      continue;
    }
    auto post = post_from_record(record);
    if (!post) {
      ++result.skipped;
      continue;
    }
    if (!is_image_url(post->image_url)) {
      ++result.non_image;
      continue;
    }
    result.posts.push_back(std::move(*post));
  }
  if (in.bad()) throw IoError("error while reading post stream");
  return result;
}

std::vector<Post> dedupe_reposts(const std::vector<Post>& posts) {
  std::map<std::pair<std::string, std::string>, std::size_t> best;  // key -> index into posts
  std::vector<std::size_t> first_seen;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    const auto key = std::make_pair(posts[i].image_url, posts[i].title);
    auto [it, inserted] = best.try_emplace(key, i);
    if (inserted) {
      first_seen.push_back(i);
      continue;
    }
    const Post& current = posts[it->second];
    const Post& candidate = posts[i];
    if (candidate.score > current.score ||
        (candidate.score == current.score && candidate.created_at < current.created_at)) {
      it->second = i;
    }
  }
  std::vector<Post> out;
  out.reserve(first_seen.size());
  for (std::size_t i : first_seen) out.push_back(posts[best.at({posts[i].image_url, posts[i].title})]);
  return out;
}

Bin assign_bin(double percentile) {
  if (!(percentile >= 0.0 && percentile <= 1.0))
    throw ValidationError("percentile out of [0, 1]: " + io::format_double(percentile));
  if (percentile >= 0.95) return Bin::VH;
  if (percentile >= 0.75) return Bin::H;
  if (percentile >= 0.50) return Bin::M;
  return Bin::L;
}

PercentileResult compute_percentiles(const std::vector<Post>& posts, std::size_t min_posts) {
  std::map<std::string, std::vector<const Post*>> by_subreddit;
  for (const auto& p : posts) by_subreddit[p.subreddit].push_back(&p);

  PercentileResult result;
  for (const auto& [subreddit, members] : by_subreddit) {
    if (members.size() < std::max<std::size_t>(min_posts, 2)) {
      result.rejected_subreddits.push_back(subreddit);
      continue;
    }
    std::vector<std::int64_t> sorted;
    sorted.reserve(members.size());
    for (const Post* p : members) sorted.push_back(p->score);
    std::sort(sorted.begin(), sorted.end());
    const double denom = static_cast<double>(members.size() - 1);
    for (const Post* p : members) {
      const auto below = std::lower_bound(sorted.begin(), sorted.end(), p->score) - sorted.begin();
      const double percentile = std::round(static_cast<double>(below) / denom * 1e6) / 1e6;
      result.entries.push_back(CorpusEntry{*p, percentile, assign_bin(percentile), std::nullopt});
    }
  }
  return result;
}

std::string image_key(std::string_view url) {
  const auto cut = url.find_first_of("?#");
  if (cut != std::string_view::npos) url = url.substr(0, cut);
  while (!url.empty() && url.back() == '/') url.remove_suffix(1);
  const auto slash = url.rfind('/');
  std::string_view segment = slash == std::string_view::npos ? url : url.substr(slash + 1);
  const auto dot = segment.rfind('.');
  if (dot != std::string_view::npos && dot > 0) segment = segment.substr(0, dot);
  return std::string(segment);
}

ViewCounts read_views(std::istream& in) {
  if (!in) throw IoError("views stream is not readable");
  ViewCounts views;
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    const auto fields = io::split_csv(line);
    if (header) {
      header = false;
      if (fields.size() != 2 || fields[0] != "image_id" || fields[1] != "views")
        throw ValidationError("views file must start with header 'image_id,views'");
      continue;
    }
    if (fields.size() != 2) throw ValidationError("views line " + std::to_string(line_no) + ": expected 2 columns");
    const long long count = io::parse_int(fields[1]);
    if (count < 0) throw ValidationError("views line " + std::to_string(line_no) + ": negative count");
    if (!views.emplace(fields[0], count).second)
      throw ValidationError("duplicate image id in views: '" + fields[0] + "'");
  }
  if (in.bad()) throw IoError("error while reading views stream");
  return views;
}

std::vector<CorpusEntry> join_views(std::vector<CorpusEntry> entries, const ViewCounts& views) {
  for (auto& e : entries) {
    auto it = views.find(image_key(e.post.image_url));
    e.views = it == views.end() ? std::nullopt : std::optional<std::int64_t>(it->second);
  }
  return entries;
}

void write_corpus(std::ostream& out, const std::vector<CorpusEntry>& entries) {
  out << "{\n  \"entries\": [";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    out << (i == 0 ? "\n" : ",\n") << "    {\"id\": " << json(e.post.id).dump()
        << ", \"subreddit\": " << json(e.post.subreddit).dump() << ", \"title\": " << json(e.post.title).dump()
        << ", \"image_url\": " << json(e.post.image_url).dump() << ", \"score\": " << e.post.score
        << ", \"created_at\": " << e.post.created_at << ", \"percentile\": " << io::format_fixed(e.percentile, 6)
        << ", \"bin\": \"" << to_string(e.bin) << "\", \"views\": "
        << (e.views ? std::to_string(*e.views) : std::string("null")) << "}";
  }
  out << (entries.empty() ? "]\n}\n" : "\n  ]\n}\n");
}

std::vector<CorpusEntry> read_corpus(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("corpus document is not valid: ") + e.what());
  }
  std::vector<CorpusEntry> entries;
  try {
    for (const auto& r : doc.at("entries")) {
      CorpusEntry e;
      e.post = Post{r.at("id").get<std::string>(),        r.at("subreddit").get<std::string>(),
                    r.at("title").get<std::string>(),     r.at("image_url").get<std::string>(),
                    r.at("score").get<std::int64_t>(),    r.at("created_at").get<std::int64_t>()};
      e.percentile = r.at("percentile").get<double>();
      e.bin = bin_from_string(r.at("bin").get<std::string>());
      if (!r.at("views").is_null()) e.views = r.at("views").get<std::int64_t>();
      entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed corpus entry: ") + e.what());
  }
  return entries;
}

std::vector<CorpusEntry> load_corpus_file(const std::string& path) {
  auto in = io::open_input(path);
  return read_corpus(in);
}

void save_corpus_file(const std::string& path, const std::vector<CorpusEntry>& entries) {
  auto out = io::open_output(path);
  write_corpus(out, entries);
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace karma
