#include "dentist/metrics.hpp"

namespace dentist {

namespace {

struct LexiconRow {
    const char* canonical;
    const char* synonyms;  // comma-separated, may be empty
};

// The 80 everyday object categories used by common captioning benchmarks,
// with surface forms folded onto them.
const LexiconRow kDefaultRows[] = {
    {"person",
     "man,woman,boy,girl,child,kid,baby,guy,lady,people,men,women,children,kids,guys,player,"
     "rider,skier,snowboarder,surfer,pedestrian,worker,chef,cook,farmer,officer"},
    {"bicycle", "bike,bicycles,bikes,cycle"},
    {"car", "cars,automobile,suv,sedan,taxi,cab,jeep"},
    {"motorcycle", "motorbike,motorcycles,moped,scooter"},
    {"airplane", "plane,planes,airplanes,jet,aircraft,airliner"},
    {"bus", "buses,minibus,coach"},
    {"train", "trains,locomotive,tram"},
    {"truck", "trucks,pickup,lorry,van"},
    {"boat", "boats,ship,ships,ferry,sailboat,canoe,kayak,dinghy"},
    {"traffic light", "traffic lights,stoplight,stop light,traffic signal"},
    {"fire hydrant", "hydrant,fire hydrants"},
    {"stop sign", "stop signs"},
    {"parking meter", "parking meters"},
    {"bench", "benches"},
    {"bird", "birds,duck,ducks,goose,geese,pigeon,seagull,gull,owl,eagle,parrot,crow"},
    {"cat", "cats,kitten,kitty"},
    {"dog", "dogs,puppy,pup"},
    {"horse", "horses,pony,stallion,mare,foal"},
    {"sheep", "lamb,lambs,ram,ewe"},
    {"cow", "cows,cattle,bull,calf,ox,oxen"},
    {"elephant", "elephants"},
    {"bear", "bears,cub,grizzly"},
    {"zebra", "zebras"},
    {"giraffe", "giraffes"},
    {"backpack", "backpacks,knapsack,rucksack"},
    {"umbrella", "umbrellas,parasol"},
    {"handbag", "handbags,purse,purses"},
    {"tie", "ties,necktie,bow tie,bowtie"},
    {"suitcase", "suitcases,luggage,briefcase"},
    {"frisbee", "frisbees,flying disc"},
    {"skis", "ski"},
    {"snowboard", "snowboards"},
    {"sports ball", "ball,balls,soccer ball,basketball,football,volleyball,tennis ball"},
    {"kite", "kites"},
    {"baseball bat", "bat,bats,baseball bats"},
    {"baseball glove", "glove,gloves,mitt,baseball gloves"},
    {"skateboard", "skateboards"},
    {"surfboard", "surfboards"},
    {"tennis racket", "racket,rackets,racquet,tennis racquet"},
    {"bottle", "bottles"},
    {"wine glass", "wine glasses,wineglass"},
    {"cup", "cups,mug,mugs,teacup"},
    {"fork", "forks"},
    {"knife", "knives"},
    {"spoon", "spoons"},
    {"bowl", "bowls"},
    {"banana", "bananas"},
    {"apple", "apples"},
    {"sandwich", "sandwiches,burger,hamburger,cheeseburger"},
    {"orange", "oranges"},
    {"broccoli", ""},
    {"carrot", "carrots"},
    {"hot dog", "hot dogs,hotdog,hotdogs,frank,wiener"},
    {"pizza", "pizzas"},
    {"donut", "donuts,doughnut,doughnuts"},
    {"cake", "cakes,cupcake,cupcakes"},
    {"chair", "chairs,armchair,seat,seats"},
    {"couch", "couches,sofa,sofas,loveseat"},
    {"potted plant", "potted plants,houseplant,house plant"},
    {"bed", "beds"},
    {"dining table", "dining tables,table,tables,desk,desks"},
    {"toilet", "toilets,lavatory,commode"},
    {"tv", "tvs,television,televisions,monitor,monitors"},
    {"laptop", "laptops,notebook computer"},
    {"mouse", "computer mouse"},
    {"remote", "remotes,remote control,remote controls"},
    {"keyboard", "keyboards"},
    {"cell phone", "cell phones,cellphone,cellphones,phone,phones,mobile phone,smartphone"},
    {"microwave", "microwaves,microwave oven"},
    {"oven", "ovens,stove,stoves"},
    {"toaster", "toasters"},
    {"sink", "sinks,washbasin,basin"},
    {"refrigerator", "refrigerators,fridge,freezer"},
    {"book", "books"},
    {"clock", "clocks,watch,watches"},
    {"vase", "vases"},
    {"scissors", "shears"},
    {"teddy bear", "teddy bears,teddy,stuffed bear,stuffed animal"},
    {"hair drier", "hair dryer,hairdryer,blow dryer"},
    {"toothbrush", "toothbrushes"},
};

ObjectLexicon build_default() {
    std::string lines;
    for (const auto& row : kDefaultRows) {
        lines += row.canonical;
        if (row.synonyms[0] != '\0') {
            lines += '\t';
            lines += row.synonyms;
        }
        lines += '\n';
    }
    return parse_lexicon(lines);
}

}  // namespace

const ObjectLexicon& ObjectLexicon::default_lexicon() {
    static const ObjectLexicon lexicon = build_default();
    return lexicon;
}

}  // namespace dentist
