#include "emoji/lexicon.hpp"

#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "emoji/utf8.hpp"

namespace emoji {
namespace {

struct Seed {
  const char* emoji;
  const char* tags;  // comma separated
};

// clang-format off
constexpr Seed kCurated[] = {
  {"😂", "laughing,lol,hilarious"}, {"❤️", "love,heart,romance"}, {"🤣", "rofl,dying,cracking"},
  {"😍", "adore,crush,gorgeous"}, {"😭", "sobbing,crying,tears"}, {"😊", "smile,blush,sweet"},
  {"🙏", "please,pray,thanks"}, {"😘", "kiss,smooch,darling"}, {"🥰", "affection,cuddle,cherish"},
  {"👍", "ok,approve,agreed"}, {"😁", "grin,cheesy,beaming"}, {"🥺", "begging,pleading,pouty"},
  {"😅", "phew,awkward,nervous"}, {"🔥", "fire,lit,hot"}, {"🤔", "thinking,hmm,wonder"},
  {"💕", "hearts,lovely,sweetheart"}, {"😉", "wink,flirt,hint"}, {"😎", "cool,sunglasses,chill"},
  {"🎉", "party,celebrate,congrats"}, {"😢", "sad,upset,unhappy"}, {"💀", "dead,skull,deceased"},
  {"😆", "giggle,chuckle,funny"}, {"👏", "applause,clap,bravo"}, {"💯", "hundred,perfect,facts"},
  {"🙄", "eyeroll,whatever,annoyed"}, {"😩", "weary,exhausted,ugh"}, {"🤗", "hug,embrace,welcome"},
  {"😋", "yummy,delicious,tasty"}, {"😡", "angry,furious,mad"}, {"🥳", "birthday,festive,hooray"},
  {"💪", "strong,muscle,gym"}, {"😴", "sleepy,nap,bedtime"}, {"😱", "shocked,scream,omg"},
  {"😇", "angel,innocent,halo"}, {"🤦", "facepalm,dumb,seriously"}, {"🤷", "shrug,dunno,idk"},
  {"✨", "sparkle,magic,shiny"}, {"😌", "relieved,calm,peaceful"}, {"😔", "pensive,regret,gloomy"},
  {"😜", "silly,kidding,goofy"}, {"👌", "fine,alright,excellent"}, {"🙈", "embarrassed,oops,shy"},
  {"😏", "smirk,sly,cheeky"}, {"💔", "heartbreak,breakup,heartbroken"}, {"🌹", "rose,valentine,bouquet"},
  {"😒", "unamused,meh,bored"}, {"🤩", "starstruck,amazing,wow"}, {"😬", "grimace,yikes,cringe"},
  {"🙂", "slightsmile,polite,okay"}, {"👀", "eyes,watching,looking"}, {"😳", "flushed,surprised,blushing"},
  {"🤤", "drooling,craving,hungry"}, {"☺️", "content,pleased,happy"}, {"💙", "blue,loyal,trust"},
  {"💜", "purple,caring,compassion"}, {"🤪", "crazy,wacky,zany"}, {"😤", "huff,triumph,frustrated"},
  {"🎂", "cake,candles,anniversary"}, {"😞", "disappointed,letdown,downcast"}, {"😑", "expressionless,blank,unimpressed"},
  {"🙃", "upsidedown,sarcasm,irony"}, {"🤞", "luck,hope,fingers"}, {"🎶", "music,song,melody"},
  {"☀️", "sunny,sunshine,summer"}, {"💋", "lipstick,lips,kisses"}, {"👋", "hello,hi,bye"},
  {"😃", "cheerful,glad,joyful"}, {"🤮", "vomit,gross,disgusting"}, {"😈", "devil,naughty,mischief"},
  {"🤯", "mindblown,unbelievable,insane"}, {"🥵", "sweating,heatwave,spicy"}, {"🥶", "freezing,cold,frozen"},
  {"💖", "sparklingheart,precious,adorable"}, {"💗", "growingheart,smitten,infatuated"}, {"💞", "revolving,soulmate,together"},
  {"🖤", "black,goth,dark"}, {"💚", "green,nature,envy"}, {"💛", "yellow,friendship,bright"},
  {"🧡", "orange,warmth,autumn"}, {"🤍", "white,pure,clean"}, {"😻", "catlove,kitten,meow"},
  {"🐶", "dog,puppy,woof"}, {"🐱", "cat,kitty,feline"}, {"🌸", "blossom,spring,cherry"},
  {"🌈", "rainbow,pride,colorful"}, {"⭐", "star,favorite,rating"}, {"🌙", "moon,night,goodnight"},
  {"☕", "coffee,espresso,latte"}, {"🍕", "pizza,pepperoni,slice"}, {"🍔", "burger,hamburger,fastfood"},
  {"🍟", "fries,chips,potato"}, {"🍺", "beer,pub,brew"}, {"🍷", "wine,merlot,vineyard"},
  {"🍾", "champagne,bubbly,toast"}, {"🍰", "dessert,pastry,shortcake"}, {"🍫", "chocolate,cocoa,candy"},
  {"🍩", "donut,doughnut,glazed"}, {"🍦", "icecream,cone,softserve"}, {"🍎", "apple,fruit,orchard"},
  {"🍓", "strawberry,berries,jam"}, {"🍌", "banana,smoothie,peel"}, {"🍉", "watermelon,picnic,juicy"},
  {"🍑", "peach,booty,nectar"}, {"🍆", "eggplant,aubergine,veggie"}, {"🥑", "avocado,guacamole,toastie"},
  {"🌮", "taco,tuesday,mexican"}, {"🍣", "sushi,salmon,nigiri"}, {"🍜", "ramen,noodles,broth"},
  {"🍝", "spaghetti,pasta,carbonara"}, {"🍿", "popcorn,movie,cinema"}, {"🥂", "cheers,clink,prosecco"},
  {"🎁", "gift,present,surprise"}, {"🎄", "christmas,xmas,tree"}, {"🎃", "halloween,pumpkin,spooky"},
  {"🎈", "balloon,inflate,helium"}, {"🎊", "confetti,festival,jubilee"}, {"🏆", "trophy,champion,winner"},
  {"⚽", "soccer,football,goal"}, {"🏀", "basketball,hoops,dunk"}, {"🏈", "touchdown,quarterback,superbowl"},
  {"⚾", "baseball,homerun,pitcher"}, {"🎾", "tennis,racket,wimbledon"}, {"🏐", "volleyball,spike,beachball"},
  {"🎮", "gaming,console,controller"}, {"🎧", "headphones,podcast,playlist"}, {"🎤", "karaoke,microphone,singing"},
  {"🎸", "guitar,rock,riff"}, {"🎹", "piano,keys,chords"}, {"🥁", "drums,drummer,beat"},
  {"📚", "books,study,library"}, {"✏️", "pencil,sketch,draft"}, {"💻", "laptop,computer,coding"},
  {"📱", "phone,mobile,texting"}, {"📷", "camera,photo,snapshot"}, {"🎥", "film,video,recording"},
  {"📺", "television,tv,series"}, {"💡", "idea,lightbulb,insight"}, {"💰", "money,cash,rich"},
  {"💸", "spending,broke,expensive"}, {"💳", "credit,card,payment"}, {"🛒", "shopping,groceries,cart"},
  {"🏠", "home,house,cozy"}, {"🏖️", "beach,vacation,seaside"}, {"⛰️", "mountain,hiking,summit"},
  {"🏕️", "camping,tent,campfire"}, {"🌊", "wave,ocean,surf"}, {"🌴", "palm,tropical,island"},
  {"🌵", "cactus,desert,succulent"}, {"🍀", "clover,lucky,irish"}, {"🍁", "maple,leaves,fall"},
  {"❄️", "snow,snowflake,winter"}, {"⛄", "snowman,flurry,blizzard"}, {"☔", "rain,umbrella,drizzle"},
  {"⚡", "lightning,thunder,storm"}, {"🌍", "earth,world,planet"}, {"🚀", "rocket,launch,spaceship"},
  {"✈️", "airplane,flight,airport"}, {"🚗", "car,drive,roadtrip"}, {"🚲", "bike,bicycle,cycling"},
  {"🚌", "bus,commute,transit"}, {"🚂", "train,railway,locomotive"}, {"⛵", "sailing,boat,yacht"},
  {"⏰", "alarm,wakeup,early"}, {"⌛", "hourglass,waiting,patience"}, {"📅", "calendar,schedule,appointment"},
  {"📝", "memo,notes,homework"}, {"📌", "pin,reminder,important"}, {"🔑", "key,unlock,access"},
  {"🔒", "locked,secure,privacy"}, {"🔔", "bell,notification,ding"}, {"📢", "announcement,megaphone,loud"},
  {"💤", "snoring,zzz,slumber"}, {"💦", "splash,droplets,water"}, {"💨", "dash,zoom,speed"},
  {"💥", "boom,explosion,collision"}, {"💫", "dizzy,woozy,spinning"}, {"💬", "chat,message,conversation"},
  {"💭", "daydream,thought,imagine"}, {"✅", "done,check,completed"}, {"❌", "wrong,no,cancel"},
  {"❗", "exclamation,urgent,alert"}, {"❓", "question,confused,ask"}, {"⚠️", "warning,caution,danger"},
  {"🚫", "forbidden,prohibited,banned"}, {"♻️", "recycle,sustainable,eco"}, {"🆗", "okbutton,acknowledged,roger"},
  {"🐍", "snake,python,slither"}, {"🐢", "turtle,slow,tortoise"}, {"🐬", "dolphin,marine,flipper"},
  {"🐳", "whale,spout,humpback"}, {"🦋", "butterfly,caterpillar,metamorphosis"}, {"🐝", "bee,honey,buzz"},
  {"🐞", "ladybug,beetle,bug"}, {"🦄", "unicorn,fantasy,mythical"}, {"🐴", "horse,pony,stable"},
  {"🐷", "pig,piglet,oink"}, {"🐮", "cow,moo,dairy"}, {"🐔", "chicken,hen,rooster"},
  {"🐧", "penguin,antarctica,waddle"}, {"🦁", "lion,roar,king"}, {"🐯", "tiger,stripes,jungle"},
  {"🐻", "bear,grizzly,teddy"}, {"🐼", "panda,bamboo,fluffy"}, {"🐸", "frog,ribbit,toad"},
  {"🐵", "monkey,ape,primate"}, {"🦊", "fox,clever,foxy"}, {"🐺", "wolf,howl,pack"},
  {"🦈", "shark,jaws,bite"}, {"🐙", "octopus,tentacle,kraken"}, {"🦀", "crab,claws,crustacean"},
  {"🌻", "sunflower,seeds,field"}, {"🌷", "tulip,garden,petals"}, {"🌺", "hibiscus,aloha,hawaii"},
  {"🍄", "mushroom,fungi,toadstool"}, {"🌲", "evergreen,pine,forest"}, {"🌚", "newmoon,shady,creepy"},
  {"🌞", "sunface,morning,daylight"}, {"👑", "crown,queen,royalty"}, {"💍", "ring,engaged,proposal"},
  {"💎", "diamond,gem,jewel"}, {"👗", "dress,fashion,outfit"}, {"👠", "heels,stiletto,glam"},
  {"👟", "sneakers,running,trainers"}, {"🧢", "cap,hat,baseballcap"}, {"👶", "baby,newborn,infant"},
  {"👵", "grandma,granny,nana"}, {"👴", "grandpa,grandad,gramps"}, {"👨‍👩‍👧", "family,parents,household"},
  {"💑", "couple,dating,relationship"}, {"👯", "besties,twins,dancers"}, {"💃", "dance,salsa,dancing"},
  {"🕺", "disco,groove,boogie"}, {"🏃", "run,jogging,marathon"}, {"🧘", "yoga,meditate,zen"},
  {"🏋️", "weightlifting,lifting,barbell"}, {"🚴", "cyclist,peloton,pedal"}, {"🏊", "swimming,pool,laps"},
  {"🤝", "handshake,deal,partnership"}, {"✌️", "peace,victory,vsign"}, {"🤘", "metal,rockon,headbang"},
  {"👊", "fistbump,punch,brofist"}, {"🙌", "praise,hallelujah,yay"}, {"👎", "dislike,thumbsdown,disapprove"},
  {"🤙", "callme,shaka,hangloose"}, {"🖕", "rude,offensive,screwyou"}, {"🤬", "cursing,swearing,rage"},
  {"😷", "mask,sick,flu"}, {"🤒", "fever,thermometer,ill"}, {"🤕", "injured,bandage,hurt"},
  {"🤧", "sneeze,allergies,tissue"}, {"💊", "pill,medicine,pharmacy"}, {"💉", "vaccine,injection,syringe"},
  {"🏥", "hospital,clinic,doctor"}, {"🎓", "graduation,diploma,degree"}, {"🏫", "school,classroom,teacher"},
  {"💼", "work,office,business"}, {"📈", "growth,stocks,profit"}, {"📉", "decline,crash,loss"},
  {"🇺🇸", "usa,america,american"}, {"🇬🇧", "uk,britain,british"}, {"🇮🇳", "india,indian,bharat"},
};
// clang-format on

std::vector<std::string> split_tags(const char* csv) {
  std::vector<std::string> tags;
  std::stringstream ss(csv);
  std::string tag;
  while (std::getline(ss, tag, ',')) tags.push_back(tag);
  return tags;
}

// Pronounceable pseudo-word derived from `index` (SplitMix64-style mixing).
std::string pseudo_word(std::uint64_t index) {
  static constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
  static constexpr const char* kVowels[] = {"a", "e", "i", "o", "u"};
  std::uint64_t x = index + 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  x ^= x >> 31;
  std::string word;
  for (int syllable = 0; syllable < 3; ++syllable) {
    word += kOnsets[x % 14];
    x /= 14;
    word += kVowels[x % 5];
    x /= 5;
  }
  word += kOnsets[x % 14];
  return word;
}

constexpr std::size_t kGeneratedLimit = 1400;

std::vector<LexiconEntry> build_lexicon() {
  std::vector<LexiconEntry> out;
  std::unordered_set<std::string> seen;
  for (const Seed& s : kCurated) {
    out.push_back({s.emoji, split_tags(s.tags)});
    seen.insert(s.emoji);
  }
  const std::pair<char32_t, char32_t> ranges[] = {
      {0x1F300, 0x1F5FF}, {0x1F680, 0x1F6FF}, {0x1F900, 0x1F9FF}, {0x1FA70, 0x1FAFF}, {0x2600, 0x26FF}};
  std::unordered_set<std::string> words;
  for (const auto& entry : out)
    for (const auto& t : entry.tags) words.insert(t);
  std::uint64_t counter = 0;
  for (auto [lo, hi] : ranges) {
    for (char32_t cp = lo; cp <= hi && out.size() < kGeneratedLimit; ++cp) {
      std::string e;
      utf8::append(e, cp);
      if (seen.count(e) != 0) continue;
      // Skip skin-tone modifiers, they only combine with a base.
      if (cp >= 0x1F3FB && cp <= 0x1F3FF) continue;
      seen.insert(e);
      std::string word;
      do {
        word = pseudo_word(counter++);
      } while (!words.insert(word).second);
      out.push_back({std::move(e), {std::move(word)}});
    }
  }
  return out;
}

const std::vector<LexiconEntry>& lexicon_storage() {
  static const std::vector<LexiconEntry> kLexicon = build_lexicon();
  return kLexicon;
}

}  // namespace

std::span<const LexiconEntry> emoji_lexicon() { return lexicon_storage(); }

std::size_t curated_lexicon_size() { return std::size(kCurated); }

std::optional<std::vector<std::string>> lexicon_tags(std::string_view emoji) {
  static const std::unordered_map<std::string, std::size_t> kIndex = [] {
    std::unordered_map<std::string, std::size_t> index;
    const auto& lex = lexicon_storage();
    for (std::size_t i = 0; i < lex.size(); ++i) index.emplace(lex[i].emoji, i);
    return index;
  }();
  const auto it = kIndex.find(std::string(utf8::trim(emoji)));
  if (it == kIndex.end()) return std::nullopt;
  return lexicon_storage()[it->second].tags;
}

}  // namespace emoji
