//! Bundled word lists for the rule-based fallback simplifier: an
//! adverb/intensifier stoplist (rule: drop) and a complex→simple
//! substitution lexicon (rule: replace). All entries lowercase single tokens.

pub const STOPLIST: &[&str] = &[
    "absolutely",
    "actually",
    "allegedly",
    "apparently",
    "arguably",
    "basically",
    "certainly",
    "clearly",
    "completely",
    "deeply",
    "definitely",
    "effectively",
    "entirely",
    "especially",
    "essentially",
    "evidently",
    "extremely",
    "fairly",
    "highly",
    "incredibly",
    "indeed",
    "largely",
    "literally",
    "merely",
    "mostly",
    "naturally",
    "notably",
    "obviously",
    "particularly",
    "perhaps",
    "possibly",
    "practically",
    "probably",
    "quickly",
    "quite",
    "rather",
    "really",
    "relatively",
    "remarkably",
    "reportedly",
    "seemingly",
    "simply",
    "slightly",
    "somewhat",
    "strongly",
    "supposedly",
    "surprisingly",
    "totally",
    "truly",
    "ultimately",
    "undoubtedly",
    "utterly",
    "very",
    "virtually",
];

pub const LEXICON: &[(&str, &str)] = &[
    ("abundant", "many"),
    ("accurate", "right"),
    ("additional", "more"),
    ("additionally", "also"),
    ("adjacent", "near"),
    ("adolescent", "teen"),
    ("affluent", "rich"),
    ("ancient", "old"),
    ("antagonist", "enemy"),
    ("anticipate", "expect"),
    ("antiquated", "old"),
    ("anxious", "worried"),
    ("apprehend", "catch"),
    ("apprehensive", "worried"),
    ("approximately", "about"),
    ("arrive", "come"),
    ("articulate", "say"),
    ("ascertain", "learn"),
    ("assemble", "gather"),
    ("assistance", "help"),
    ("attempt", "try"),
    ("attorney", "lawyer"),
    ("augment", "add"),
    ("authentic", "real"),
    ("benevolent", "kind"),
    ("beverage", "drink"),
    ("boulevard", "road"),
    ("canine", "dog"),
    ("catastrophe", "disaster"),
    ("cease", "stop"),
    ("challenging", "hard"),
    ("colleague", "coworker"),
    ("commence", "begin"),
    ("commonly", "often"),
    ("communicate", "talk"),
    ("companion", "friend"),
    ("compassionate", "kind"),
    ("compensation", "pay"),
    ("comprehend", "understand"),
    ("comprehension", "understanding"),
    ("compulsory", "required"),
    ("conceal", "hide"),
    ("consequently", "so"),
    ("considerable", "large"),
    ("construct", "build"),
    ("contemplate", "think"),
    ("contemporary", "modern"),
    ("converse", "talk"),
    ("convert", "change"),
    ("courteous", "polite"),
    ("currency", "money"),
    ("currently", "now"),
    ("dejected", "sad"),
    ("demonstrate", "show"),
    ("denote", "mean"),
    ("depart", "leave"),
    ("depict", "show"),
    ("desire", "want"),
    ("despondent", "sad"),
    ("destitute", "poor"),
    ("deteriorate", "worsen"),
    ("determine", "decide"),
    ("difficulty", "trouble"),
    ("dilemma", "problem"),
    ("diminish", "shrink"),
    ("diminutive", "tiny"),
    ("disclose", "tell"),
    ("dispatch", "send"),
    ("disperse", "scatter"),
    ("distribute", "share"),
    ("divulge", "tell"),
    ("donate", "give"),
    ("edifice", "building"),
    ("elated", "happy"),
    ("eliminate", "remove"),
    ("emphasize", "stress"),
    ("employment", "work"),
    ("endeavor", "try"),
    ("enhance", "improve"),
    ("enormous", "huge"),
    ("erroneous", "wrong"),
    ("evaluate", "judge"),
    ("eventually", "later"),
    ("exhausted", "tired"),
    ("expedite", "rush"),
    ("extensive", "large"),
    ("fabricate", "make"),
    ("facile", "easy"),
    ("fatigued", "tired"),
    ("fearful", "afraid"),
    ("feasible", "possible"),
    ("feeble", "weak"),
    ("feline", "cat"),
    ("filthy", "dirty"),
    ("fragile", "weak"),
    ("fraudulent", "fake"),
    ("frequently", "often"),
    ("frightened", "scared"),
    ("function", "work"),
    ("furious", "angry"),
    ("furthermore", "also"),
    ("genuine", "real"),
    ("gradual", "slow"),
    ("halt", "stop"),
    ("hazardous", "risky"),
    ("hence", "so"),
    ("however", "but"),
    ("imminent", "near"),
    ("impoverished", "poor"),
    ("inevitable", "certain"),
    ("infant", "baby"),
    ("infinite", "endless"),
    ("infrequent", "rare"),
    ("inhabit", "live"),
    ("initially", "first"),
    ("innovative", "new"),
    ("inspect", "check"),
    ("instantaneous", "instant"),
    ("intrepid", "brave"),
    ("juvenile", "child"),
    ("legislation", "law"),
    ("lethargic", "slow"),
    ("locate", "find"),
    ("locomotive", "train"),
    ("mandatory", "required"),
    ("manufacture", "make"),
    ("microscopic", "tiny"),
    ("modified", "changed"),
    ("moreover", "also"),
    ("nevertheless", "still"),
    ("nonetheless", "still"),
    ("notified", "told"),
    ("novel", "new"),
    ("numerous", "many"),
    ("objective", "goal"),
    ("obliterate", "destroy"),
    ("obscure", "unclear"),
    ("observe", "see"),
    ("obstinate", "stubborn"),
    ("obtain", "get"),
    ("occasionally", "sometimes"),
    ("operate", "run"),
    ("opponent", "rival"),
    ("parched", "thirsty"),
    ("participate", "join"),
    ("perceive", "see"),
    ("perilous", "risky"),
    ("permit", "let"),
    ("permitted", "let"),
    ("physician", "doctor"),
    ("possess", "have"),
    ("precipitation", "rain"),
    ("predicament", "problem"),
    ("predominantly", "mainly"),
    ("presently", "now"),
    ("presume", "guess"),
    ("previously", "before"),
    ("primarily", "mainly"),
    ("prior", "earlier"),
    ("pristine", "clean"),
    ("proclaim", "say"),
    ("profession", "job"),
    ("prohibit", "ban"),
    ("prosperous", "rich"),
    ("purchase", "buy"),
    ("rapidly", "fast"),
    ("ravenous", "hungry"),
    ("recollect", "remember"),
    ("rectified", "fixed"),
    ("reduce", "cut"),
    ("regulation", "rule"),
    ("relinquish", "drop"),
    ("remedy", "fix"),
    ("remote", "far"),
    ("remuneration", "pay"),
    ("request", "ask"),
    ("require", "need"),
    ("requirement", "need"),
    ("reside", "live"),
    ("residence", "home"),
    ("resilient", "tough"),
    ("respond", "answer"),
    ("retain", "keep"),
    ("robust", "strong"),
    ("scarce", "rare"),
    ("seize", "grab"),
    ("seldom", "rarely"),
    ("signify", "mean"),
    ("statute", "law"),
    ("sturdy", "strong"),
    ("subsequent", "later"),
    ("sufficient", "enough"),
    ("terminate", "end"),
    ("terrified", "scared"),
    ("therefore", "so"),
    ("thoroughfare", "road"),
    ("thus", "so"),
    ("translucent", "clear"),
    ("transmit", "send"),
    ("transmitted", "sent"),
    ("typically", "usually"),
    ("utilize", "use"),
    ("vehicle", "car"),
    ("vessel", "ship"),
    ("viable", "possible"),
];
