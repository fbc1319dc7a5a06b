#pragma once
// Hand-built and randomized corpora shared by unit and acceptance tests.

#include <algorithm>
#include <string>
#include <vector>

#include "crowdsel/data_model.hpp"
#include "oracles.hpp"

namespace fixture {

using crowdsel::InboundQuestion;
using crowdsel::Post;
using crowdsel::UnixSeconds;
using crowdsel::UserRecord;

constexpr UnixSeconds kMonday = 1370217600;            // 2013-06-03 00:00 UTC
constexpr UnixSeconds kQuery = kMonday + 12 * 3600;    // Monday 12:00 UTC
constexpr UnixSeconds kDay = 86400;

/// alice: 10 posts over exactly 5 days (4 retweets, 5 on the query weekday,
///   1 in the query hour), last post 600 s before the query; directed
///   response times {10, 20, 30} min with 3 of 6 answered; 1 of 4 indirect.
/// bob: no questions; 6 posts exactly one hour apart.
/// carol: no posts; directed response times {10, 10, 30} min, all answered.
inline std::vector<UserRecord> three_users() {
  UserRecord alice;
  alice.user_id = "alice";
  alice.profile_text = "I love talking and tweeting";
  const UnixSeconds last = kQuery - 600;
  const UnixSeconds first = last - 5 * kDay;  // Wednesday 11:50
  alice.posts = {
      {first, "we went to the party with friends", false, false},
      {kMonday - 4 * kDay + 12 * 3600 + 1800, "home again", true, false},  // Thursday 12:30
      {kMonday - 3 * kDay + 7 * 3600, "music tonight", false, false},
      {kMonday - 2 * kDay + 9 * 3600, "sports", true, false},
      {kMonday - 1 * kDay + 20 * 3600, "dinner", false, true},
      {kMonday + 8 * 3600, "good morning", false, false},
      {kMonday + 9 * 3600, "coffee", true, false},
      {kMonday + 10 * 3600, "meeting", false, false},
      {kMonday + 11 * 3600, "lunch soon", true, false},
      {last, "hungry", false, false},
  };
  const UnixSeconds q0 = kMonday - 10 * kDay;
  alice.inbound_questions = {
      {q0, true, q0 + 600},           {q0 + 1000, true, q0 + 1000 + 1200}, {q0 + 2000, true, q0 + 2000 + 1800},
      {q0 + 3000, true, std::nullopt}, {q0 + 4000, true, std::nullopt},      {q0 + 5000, true, std::nullopt},
      {q0 + 6000, false, q0 + 6100},  {q0 + 7000, false, std::nullopt},    {q0 + 8000, false, std::nullopt},
      {q0 + 9000, false, std::nullopt},
  };
  alice.label = 1;

  UserRecord bob;
  bob.user_id = "bob";
  bob.profile_text = "";
  for (int i = 0; i < 6; ++i) bob.posts.push_back({kQuery - 86400 + i * 3600, "news update", false, false});
  bob.label = -1;

  UserRecord carol;
  carol.user_id = "carol";
  carol.profile_text = "communication communication";
  const UnixSeconds q1 = kMonday - 3 * kDay;
  carol.inbound_questions = {{q1, true, q1 + 600}, {q1 + 5000, true, q1 + 5000 + 600}, {q1 + 9000, true, q1 + 9000 + 1800}};
  carol.label = -1;

  return {alice, bob, carol};
}

inline const char* kWords[] = {"friend", "party",  "we",    "music",  "home", "the",   "news",  "happy",
                               "sad",    "talk",   "run",   "dinner", "up",   "because", "time", "hello",
                               "world",  "coffee", "sleep", "money"};

inline std::string random_text(oracle::Gen& g) {
  std::string s;
  const auto n = 1 + g.below(12);
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += g.uniform() < 0.2 ? ", " : " ";
    s += kWords[g.below(std::size(kWords))];
  }
  return s;
}

inline UserRecord random_user(oracle::Gen& g, const std::string& id, UnixSeconds query_time) {
  UserRecord r;
  r.user_id = id;
  r.profile_text = random_text(g);
  const auto posts = g.below(30);
  for (std::size_t i = 0; i < posts; ++i) {
    const bool rt = g.uniform() < 0.3;
    r.posts.push_back({query_time - static_cast<UnixSeconds>(g.below(40 * 86400)), random_text(g), rt,
                       g.uniform() < 0.2});
  }
  const auto qs = g.below(10);
  for (std::size_t i = 0; i < qs; ++i) {
    InboundQuestion q;
    q.asked_at = query_time - static_cast<UnixSeconds>(g.below(60 * 86400));
    q.directed = g.uniform() < 0.6;
    if (g.uniform() < 0.5) q.responded_at = q.asked_at + static_cast<UnixSeconds>(g.below(5 * 86400));
    r.inbound_questions.push_back(q);
  }
  return r;
}

template <class T>
void permute(oracle::Gen& g, std::vector<T>& v) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[g.below(i)]);
}

}  // namespace fixture
