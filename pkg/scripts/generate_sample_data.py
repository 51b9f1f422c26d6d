#!/usr/bin/env python3
"""Regenerate the bundled sample data under src/clintriage/data/.

Produces a labeled symptom dataset in the same CSV format as the public
Symptom2Disease file (1200 rows, 24 classes, 50 per class, optional vitals
columns), a curated dialogue corpus (614 entries), the drug lexicon,
stewardship rules, the interaction database, fallback treatment lines, a
synonym file, and retrieval-judgment / reference fixtures.

Deterministic: rerunning reproduces identical files.
"""

from __future__ import annotations

import csv
import json
import os
import re
import sys

import numpy as np

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "clintriage", "data")

SEED = 7
RECORDS_PER_CLASS = 50
DIALOGUES_PER_CLASS = 25
GENERAL_DIALOGUES = 14

# ---------------------------------------------------------------------------
# Symptom phrase pools, one per diagnostic class.
# ---------------------------------------------------------------------------

SYMPTOMS: dict[str, list[str]] = {
    "Acne": [
        "pimples all over my face", "blackheads on my nose", "whiteheads on my chin",
        "oily skin on my forehead", "pus filled bumps on my cheeks",
        "painful red breakouts", "scarring from old spots", "clogged pores",
        "breakouts along my jawline",
    ],
    "Arthritis": [
        "stiff and swollen joints", "knee pain when climbing stairs",
        "morning stiffness in my fingers", "aching wrists", "swollen knuckles",
        "difficulty walking because of joint pain", "creaking joints",
        "tender joints that feel warm", "hip pain when standing up",
    ],
    "Bronchial Asthma": [
        "wheezing when I breathe out", "tightness in my chest",
        "coughing fits at night", "shortness of breath after exercise",
        "whistling sound while breathing", "trouble catching my breath",
        "waking up breathless", "chest tightness around dust",
    ],
    "Cervical spondylosis": [
        "neck pain that will not go away", "stiffness in my neck",
        "pain radiating from my neck to my shoulder", "tingling in my arms",
        "dizziness when turning my head", "grinding feeling in my neck",
        "numbness in my fingers from my neck", "headache starting at my neck",
    ],
    "Chicken pox": [
        "itchy fluid filled blisters", "red spots spreading over my body",
        "blisters that crust over", "itchy rash that started on my chest",
        "spots turning into blisters", "mild fever with an itchy rash",
        "blisters on my scalp and face", "new crops of itchy spots every day",
    ],
    "Common Cold": [
        "a runny nose", "constant sneezing", "a blocked stuffy nose",
        "a sore scratchy throat", "a mild dry cough", "watery eyes",
        "a tickle in my throat", "post nasal drip", "mild congestion",
    ],
    "Dengue": [
        "high fever with severe headache", "pain behind my eyes",
        "severe joint and muscle pain", "a skin rash with the fever",
        "deep fatigue and exhaustion", "bleeding gums", "aching bones",
        "joint pain with a skin rash", "feeling wiped out with body pain",
    ],
    "Dimorphic Hemorrhoids": [
        "painful bowel movements", "bright red bleeding during stool",
        "a painful lump near my anus", "itching around my back passage",
        "straining with constipation", "soreness after passing stool",
        "swelling around the anus", "discomfort when sitting",
    ],
    "Fungal infection": [
        "itchy ring shaped patches on my skin", "scaly discolored patches",
        "itching in my skin folds", "cracked peeling skin between my toes",
        "a spreading circular rash", "white patches that itch",
        "red itchy patches in my groin", "flaky skin that keeps itching",
    ],
    "Hypertension": [
        "a pounding headache at the back of my head", "frequent nosebleeds",
        "dizziness when I stand", "a pounding feeling in my chest",
        "blurred vision with headaches", "lack of concentration",
        "a feeling of pressure in my head", "ringing in my ears",
    ],
    "Impetigo": [
        "honey colored crusts around my nose", "red sores around my mouth",
        "oozing blisters that burst", "sores that spread when scratched",
        "crusty yellow patches on my face", "weeping sores on my chin",
        "itchy sores that leak fluid", "raw skin under yellow crusts",
    ],
    "Jaundice": [
        "yellowing of my skin", "yellow eyes", "dark colored urine",
        "pale clay colored stools", "itchy skin all over", "pain over my liver",
        "weakness with yellow skin", "loss of appetite with yellow eyes",
    ],
    "Malaria": [
        "fever with violent chills", "drenching sweats after the fever",
        "shivering fits every other day", "fever that comes in cycles",
        "splitting headache with the fever", "nausea with chills",
        "muscle pain with shivering", "feeling cold then burning hot",
    ],
    "Migraine": [
        "a throbbing headache on one side", "sensitivity to light and sound",
        "nausea with the headache", "flashing zigzag lines before the pain",
        "a pounding pain behind one eye", "headache worse with movement",
        "an aura before the headache", "vomiting when the headache peaks",
    ],
    "Pneumonia": [
        "chest pain when I breathe in", "a productive cough with green phlegm",
        "high fever with chills", "rapid shallow breathing",
        "difficulty breathing even at rest", "coughing up thick mucous",
        "crackling sounds when breathing", "chest pain and difficulty breathing",
    ],
    "Psoriasis": [
        "silvery scaly patches on my elbows", "red patches covered with scales",
        "dry cracked skin that bleeds", "thick pitted fingernails",
        "itching and burning patches", "flaky silver plaques on my scalp",
        "scaly patches on my knees", "skin peeling in thick flakes",
    ],
    "Typhoid": [
        "a fever that keeps climbing for days", "constant abdominal pain",
        "constipation followed by diarrhoea", "rose colored spots on my belly",
        "a coated tongue with fever", "weakness with a prolonged fever",
        "stomach tenderness with fever", "no appetite and a high fever for a week",
    ],
    "Varicose Veins": [
        "twisted bulging veins in my legs", "aching legs after standing",
        "swollen ankles in the evening", "a heavy feeling in my legs",
        "visible dark purple veins", "burning and throbbing in my calves",
        "leg cramps at night", "itching over the veins",
    ],
    "allergy": [
        "sneezing fits after dust exposure", "itchy watery eyes",
        "hives after eating certain food", "an itchy runny nose in spring",
        "swelling of my lips after peanuts", "itchy skin wheals",
        "a rash wherever pollen touches me", "itchy throat after pets",
    ],
    "diabetes": [
        "urinating far more often than usual", "unquenchable thirst",
        "constant hunger even after meals", "blurred vision lately",
        "cuts that heal very slowly", "unexplained weight loss",
        "tingling in my feet", "feeling drained all day with thirst",
    ],
    "drug reaction": [
        "a rash that appeared after starting a new tablet",
        "itching all over since my new medicine", "swelling of my lips after a dose",
        "hives after taking the prescribed pills", "burning skin after the injection",
        "red blotches since changing medication", "a rash that spread after antibiotics",
        "itchy welts hours after my tablet",
    ],
    "gastroesophageal reflux disease": [
        "burning behind my breastbone after meals", "a sour acid taste in my mouth",
        "heartburn when lying down", "food coming back up my throat",
        "burning chest pain after spicy food", "a burning feeling rising from my stomach",
        "waking at night with acid in my throat", "frequent belching with heartburn",
    ],
    "peptic ulcer disease": [
        "burning stomach pain when my stomach is empty", "vomiting blood",
        "constant belching and nausea", "gnawing pain relieved by eating",
        "black tarry stools", "bloating with stomach pain",
        "stomach pain that wakes me at night", "nausea with a burning stomach",
    ],
    "urinary tract infection": [
        "burning when I urinate", "a constant urge to urinate",
        "cloudy foul smelling urine", "passing urine in small amounts",
        "pressure in my lower belly", "blood in my urine",
        "stinging at the end of urination", "pelvic pain with burning urine",
    ],
}

GENERIC = ["fatigue", "a mild headache", "nausea", "body aches", "weakness",
           "loss of appetite", "dizziness", "trouble sleeping"]

# Words used for negation tails; skipped when they overlap the class symptoms.
NEGATABLE = ["fever", "rash", "cough", "vomiting", "chills", "diarrhoea"]

# Clinically confusable neighbours: records sometimes borrow one phrase from a
# neighbour so class boundaries overlap the way real complaints do.
CONFUSABLE = {
    "Dengue": ["Malaria", "Typhoid", "Chicken pox"],
    "Malaria": ["Dengue", "Typhoid"],
    "Typhoid": ["Malaria", "Dengue"],
    "Chicken pox": ["Impetigo", "Dengue"],
    "Impetigo": ["Chicken pox", "Fungal infection"],
    "Fungal infection": ["Psoriasis", "Impetigo"],
    "Psoriasis": ["Fungal infection"],
    "Common Cold": ["allergy", "Pneumonia"],
    "allergy": ["Common Cold", "drug reaction"],
    "drug reaction": ["allergy"],
    "Pneumonia": ["Bronchial Asthma", "Common Cold"],
    "Bronchial Asthma": ["Pneumonia"],
    "gastroesophageal reflux disease": ["peptic ulcer disease"],
    "peptic ulcer disease": ["gastroesophageal reflux disease"],
    "Migraine": ["Hypertension", "Cervical spondylosis"],
    "Hypertension": ["Migraine"],
    "Cervical spondylosis": ["Migraine", "Arthritis"],
    "Arthritis": ["Cervical spondylosis", "Dengue"],
}

FRAMES = [
    "I have {s}.",
    "I have been experiencing {s} for the past {n} days.",
    "My main symptoms are {s}.",
    "I am suffering from {s}.",
    "Lately I have had {s}.",
    "For about {n} days now I have {s}.",
    "It started with {s}.",
    "I keep getting {s}.",
]

FEVER_CLASSES = {"Chicken pox", "Dengue", "Malaria", "Typhoid", "Pneumonia"}
LOW_SPO2_CLASSES = {"Pneumonia", "Bronchial Asthma"}
FAST_HR_CLASSES = {"Pneumonia", "Malaria", "Hypertension"}

# ---------------------------------------------------------------------------
# Doctor-response pools per class (surface forms must match the lexicon).
# ---------------------------------------------------------------------------

RESPONSES: dict[str, list[str]] = {
    "Acne": [
        "Wash twice daily with a gentle cleanser and start benzoyl peroxide gel; add adapalene at night if no improvement in six weeks.",
        "Use benzoyl peroxide in the morning and avoid picking the spots; severe nodular acne may need isotretinoin from a dermatologist.",
        "Begin a topical adapalene routine and a non comedogenic moisturizer; persistent cases sometimes need doxycycline.",
        "Mild acne responds to benzoyl peroxide; keep hair off the face and change pillowcases often.",
    ],
    "Arthritis": [
        "Take naproxen with food for the flare, rest the joint, and start gentle range of motion exercises.",
        "Short courses of ibuprofen help the swelling; weight control and physiotherapy protect the joints long term.",
        "Use paracetamol for daily pain and naproxen for flares; warm compresses ease the morning stiffness.",
        "Physiotherapy plus ibuprofen during flares is the usual plan; see a rheumatologist if several joints are hot and swollen.",
    ],
    "Bronchial Asthma": [
        "Use your salbutamol inhaler two puffs as needed and avoid known triggers; a spacer improves delivery.",
        "Start salbutamol for relief, and ask about a daily inhaled corticosteroid if you need the reliever more than twice weekly.",
        "Keep a salbutamol reliever at hand, avoid smoke and dust, and seek help urgently if speaking becomes difficult.",
        "Asthma needs a reliever such as salbutamol and a written action plan; review your inhaler technique.",
    ],
    "Cervical spondylosis": [
        "Apply a warm compress, keep the screen at eye level, and take paracetamol for the pain.",
        "Gentle neck stretches and paracetamol usually settle it; a physiotherapist can teach posture correction.",
        "Use paracetamol or a short course of ibuprofen, and avoid carrying heavy bags on one shoulder.",
        "Posture work and gradual mobilization help most; persistent arm tingling needs a clinical review.",
    ],
    "Chicken pox": [
        "Apply calamine lotion for the itch, use paracetamol for fever, and keep fingernails short.",
        "Cool baths and calamine ease the itch; paracetamol for the fever and stay home until every blister crusts.",
        "Give paracetamol for fever and calamine for itching; avoid aspirin completely in this illness.",
        "Rest, fluids, calamine for the itch; antihistamines like cetirizine can help sleep.",
    ],
    "Common Cold": [
        "Rest, warm fluids, and paracetamol for the aches; it should settle within a week without antibiotics.",
        "Saline nasal rinses and paracetamol help; antibiotics do not shorten a cold.",
        "Honey and warm drinks for the throat, paracetamol if achy; see a doctor if fever lasts beyond four days.",
        "Supportive care only: fluids, rest, and paracetamol as needed.",
    ],
    "Dengue": [
        "Rest, plenty of fluids, and paracetamol only for fever; avoid NSAIDs and monitor platelet counts daily.",
        "Likely dengue with the joint pain, skin rash and fatigue; rest, fluids, and you may take ibuprofen or paracetamol for the aches. Monitor platelet counts.",
        "Hydrate aggressively, use paracetamol for fever, and return immediately for bleeding, belly pain, or drowsiness.",
        "Supportive care with fluids and rest; paracetamol for fever, repeat blood counts, and watch for warning signs.",
    ],
    "Dimorphic Hemorrhoids": [
        "Increase fiber and water, take warm sitz baths, and apply hydrocortisone cream for a few days.",
        "A stool softener, sitz baths, and hydrocortisone ointment settle most flares; avoid straining.",
        "Fiber supplements and sitz baths first; persistent bleeding needs an examination.",
        "Short course of hydrocortisone cream plus fiber; see a surgeon if the lump stays painful.",
    ],
    "Fungal infection": [
        "Apply clotrimazole cream twice daily for four weeks and keep the area clean and dry.",
        "Use clotrimazole on the patches and dry the folds well after washing; widespread disease may need oral fluconazole.",
        "Topical clotrimazole for a month; wash clothing in hot water and avoid sharing towels.",
        "Keep the skin dry, apply clotrimazole beyond the rash edge, and continue a week after it clears.",
    ],
    "Hypertension": [
        "Start amlodipine once daily, reduce salt, and check your blood pressure morning and evening.",
        "Begin losartan and a low salt diet; recheck in two weeks with a home log.",
        "Lifestyle change plus amlodipine is the usual start; walk thirty minutes daily.",
        "Cut salt and alcohol, start losartan, and monitor for dizziness.",
    ],
    "Impetigo": [
        "Apply mupirocin ointment three times daily after soaking off the crusts; wash hands often.",
        "Mupirocin for localized sores; spreading lesions may need oral cephalexin.",
        "Gently remove crusts, apply mupirocin, and keep the child home until lesions dry.",
        "Topical mupirocin and strict hygiene; launder towels separately.",
    ],
    "Jaundice": [
        "Supportive care with fluids and rest; we need liver tests, and avoid alcohol and unnecessary paracetamol until reviewed.",
        "Hydration and rest while we check liver function; use paracetamol only at reduced doses if essential.",
        "Stop alcohol, eat light meals, and get liver tests urgently; itching can be eased with cool baths.",
        "This needs blood tests for the liver; avoid fatty food and review all regular medicines.",
    ],
    "Malaria": [
        "Start artemether-lumefantrine after a positive blood film, with paracetamol for the fever spikes.",
        "Confirmed malaria is treated with artemether-lumefantrine; finish every dose and rehydrate well.",
        "Take the full artemether-lumefantrine course with fatty food, and paracetamol for fever.",
        "Blood film first; if positive, artemether-lumefantrine plus fluids and rest.",
    ],
    "Migraine": [
        "Take ibuprofen at the first sign and lie in a dark quiet room; sumatriptan if that fails.",
        "Sumatriptan early in the attack works best; keep a headache diary to find triggers.",
        "Early ibuprofen plus an anti sickness tablet like ondansetron can abort the attack.",
        "Regular sleep and meals prevent attacks; treat early with sumatriptan.",
    ],
    "Pneumonia": [
        "Start antibiotics like azithromycin, rest, push fluids, and monitor oxygen levels.",
        "Begin amoxicillin, use paracetamol for the fever, and return if breathing worsens.",
        "Oral azithromycin for five days with rest and hydration; a chest X-ray confirms the diagnosis.",
        "Prescribe antibiotics, advise rest and fluids; check oxygen saturation and consider a chest X-ray.",
    ],
    "Psoriasis": [
        "Apply a coal tar preparation at night and a thick moisturizer through the day.",
        "A topical corticosteroid such as hydrocortisone on thin plaques, coal tar for the scalp.",
        "Moisturize heavily, short sun exposure helps, and use coal tar shampoo for the scalp plaques.",
        "Topical steroids and emollients first; widespread plaques need dermatology referral.",
    ],
    "Typhoid": [
        "Start azithromycin for uncomplicated typhoid, push fluids, and eat soft food.",
        "Treat with ciprofloxacin where strains remain sensitive; azithromycin is preferred with resistance.",
        "Azithromycin for seven days with strict hand hygiene; fever may take days to settle.",
        "Confirmed typhoid gets azithromycin; paracetamol for fever and plenty of fluids.",
    ],
    "Varicose Veins": [
        "Wear compression stockings, elevate the legs in the evening, and avoid standing still for long.",
        "Compression stockings and calf exercises help; surgical options exist for severe cases.",
        "Elevate the legs, move regularly, and use fitted compression stockings.",
        "Weight control, leg elevation, and compression stockings are the mainstay.",
    ],
    "allergy": [
        "Take cetirizine daily during the season and avoid the trigger where possible.",
        "A non drowsy antihistamine like loratadine controls the sneezing and itch.",
        "Cetirizine for the hives; carry an emergency plan if you ever had lip swelling.",
        "Identify and avoid the trigger, and use loratadine for symptoms.",
    ],
    "diabetes": [
        "Start metformin with meals, cut sugary drinks, and check fasting glucose weekly.",
        "Metformin plus diet change is first line; review feet and eyes yearly.",
        "Begin metformin at a low dose to spare the stomach and build up; some cases need insulin later.",
        "Diet, daily walking, and metformin; learn the signs of low sugar.",
    ],
    "drug reaction": [
        "Stop the suspected medicine now and take cetirizine for the itch; seek urgent care for lip or tongue swelling.",
        "Discontinue the new tablet, photograph the rash, and use cetirizine; never take that drug again until reviewed.",
        "Stop the offending drug; loratadine for the hives and a written allergy record.",
        "Withhold the new medication and review alternatives; antihistamines ease the rash.",
    ],
    "gastroesophageal reflux disease": [
        "Start omeprazole before breakfast, avoid late meals, and raise the head of the bed.",
        "Omeprazole for four weeks with smaller evening meals; cut coffee and alcohol.",
        "A trial of pantoprazole plus weight loss usually controls the burning.",
        "Avoid trigger foods, stop smoking, and take omeprazole daily for a month.",
    ],
    "peptic ulcer disease": [
        "Start omeprazole, avoid NSAIDs, eat soft meals, and seek urgent care for bleeding.",
        "Omeprazole, triple therapy if H. pylori positive; avoid NSAIDs, bland diet, follow-up in 4-6 weeks.",
        "Begin omeprazole twice daily and test for H. pylori; add amoxicillin and clarithromycin if positive.",
        "Stop all NSAIDs including aspirin, start omeprazole, and return immediately if stools turn black.",
    ],
    "urinary tract infection": [
        "Start nitrofurantoin for five days and drink plenty of water.",
        "Nitrofurantoin is first line; ciprofloxacin is reserved for complicated infections.",
        "A short nitrofurantoin course with hydration; return if fever or flank pain develops.",
        "Urine culture first if recurrent; nitrofurantoin while awaiting results.",
    ],
}

GENERAL_ADVICE = [
    "Aim for seven to nine hours of sleep and a regular wake time.",
    "Drink water through the day; pale urine is a good hydration check.",
    "Thirty minutes of brisk walking five days a week protects the heart.",
    "Wash hands for twenty seconds before meals to cut infection risk.",
    "Keep a symptom diary; patterns help your clinician enormously.",
    "Schedule routine blood pressure checks twice a year after forty.",
    "Limit added sugar and processed snacks between meals.",
    "Stretch for five minutes after long periods of sitting.",
    "Store medicines in a cool dry place away from children.",
    "Complete every prescribed antibiotic course even when you feel better.",
    "An annual eye exam catches silent problems early.",
    "Quitting smoking improves circulation within weeks.",
    "Use sunscreen on exposed skin during midday hours.",
    "Seek urgent care for chest pain, one sided weakness, or confusion.",
]

LEXICON = {
    "omeprazole": {"canonical": "omeprazole", "classes": ["ppi"]},
    "pantoprazole": {"canonical": "pantoprazole", "classes": ["ppi"]},
    "ibuprofen": {"canonical": "ibuprofen", "classes": ["nsaid"]},
    "naproxen": {"canonical": "naproxen", "classes": ["nsaid"]},
    "aspirin": {"canonical": "aspirin", "classes": ["nsaid", "antiplatelet"]},
    "nsaid": {"canonical": "nsaid-class", "classes": ["nsaid", "class-marker"]},
    "nsaids": {"canonical": "nsaid-class", "classes": ["nsaid", "class-marker"]},
    "paracetamol": {"canonical": "paracetamol", "classes": ["analgesic"]},
    "acetaminophen": {"canonical": "paracetamol", "classes": ["analgesic"]},
    "azithromycin": {"canonical": "azithromycin", "classes": ["antibiotic", "macrolide"]},
    "amoxicillin": {"canonical": "amoxicillin", "classes": ["antibiotic", "penicillin"]},
    "clarithromycin": {"canonical": "clarithromycin", "classes": ["antibiotic", "macrolide"]},
    "ciprofloxacin": {"canonical": "ciprofloxacin", "classes": ["antibiotic", "fluoroquinolone"]},
    "cephalexin": {"canonical": "cephalexin", "classes": ["antibiotic", "cephalosporin"]},
    "ceftriaxone": {"canonical": "ceftriaxone", "classes": ["antibiotic", "cephalosporin"]},
    "nitrofurantoin": {"canonical": "nitrofurantoin", "classes": ["antibiotic"]},
    "doxycycline": {"canonical": "doxycycline", "classes": ["antibiotic", "tetracycline"]},
    "mupirocin": {"canonical": "mupirocin", "classes": ["antibiotic", "topical"]},
    "antibiotic": {"canonical": "antibiotic-class", "classes": ["antibiotic", "class-marker"]},
    "antibiotics": {"canonical": "antibiotic-class", "classes": ["antibiotic", "class-marker"]},
    "metformin": {"canonical": "metformin", "classes": ["antidiabetic"]},
    "insulin": {"canonical": "insulin", "classes": ["antidiabetic"]},
    "cetirizine": {"canonical": "cetirizine", "classes": ["antihistamine"]},
    "loratadine": {"canonical": "loratadine", "classes": ["antihistamine"]},
    "salbutamol": {"canonical": "salbutamol", "classes": ["bronchodilator"]},
    "albuterol": {"canonical": "salbutamol", "classes": ["bronchodilator"]},
    "amlodipine": {"canonical": "amlodipine", "classes": ["antihypertensive"]},
    "losartan": {"canonical": "losartan", "classes": ["antihypertensive"]},
    "sumatriptan": {"canonical": "sumatriptan", "classes": ["triptan"]},
    "clotrimazole": {"canonical": "clotrimazole", "classes": ["antifungal"]},
    "fluconazole": {"canonical": "fluconazole", "classes": ["antifungal"]},
    "hydrocortisone": {"canonical": "hydrocortisone", "classes": ["corticosteroid", "topical"]},
    "calamine": {"canonical": "calamine", "classes": ["topical"]},
    "artemether-lumefantrine": {"canonical": "artemether-lumefantrine", "classes": ["antimalarial"]},
    "chloroquine": {"canonical": "chloroquine", "classes": ["antimalarial"]},
    "warfarin": {"canonical": "warfarin", "classes": ["anticoagulant"]},
    "clopidogrel": {"canonical": "clopidogrel", "classes": ["antiplatelet"]},
    "tramadol": {"canonical": "tramadol", "classes": ["analgesic", "opioid"]},
    "fluoxetine": {"canonical": "fluoxetine", "classes": ["ssri"]},
    "sildenafil": {"canonical": "sildenafil", "classes": ["pde5-inhibitor"]},
    "nitroglycerin": {"canonical": "nitroglycerin", "classes": ["nitrate"]},
    "tizanidine": {"canonical": "tizanidine", "classes": ["muscle-relaxant"]},
    "ondansetron": {"canonical": "ondansetron", "classes": ["antiemetic"]},
    "adapalene": {"canonical": "adapalene", "classes": ["retinoid", "topical"]},
    "isotretinoin": {"canonical": "isotretinoin", "classes": ["retinoid"]},
    "benzoyl peroxide": {"canonical": "benzoyl-peroxide", "classes": ["keratolytic", "topical"]},
    "coal tar": {"canonical": "coal-tar", "classes": ["keratolytic", "topical"]},
}

RULES = [
    {"id": "steward-dengue-nsaid", "scope": "Dengue", "trigger": "nsaid",
     "action": "forbid",
     "rationale": "NSAIDs raise bleeding risk with low platelets"},
    {"id": "steward-chickenpox-aspirin", "scope": "Chicken pox",
     "trigger": "aspirin", "action": "forbid",
     "rationale": "aspirin in varicella risks Reye syndrome"},
    {"id": "steward-cold-antibiotics", "scope": "Common Cold",
     "trigger": "antibiotic", "action": "forbid",
     "rationale": "viral illness; antibiotics not indicated"},
    {"id": "steward-typhoid-cipro", "scope": "Typhoid",
     "trigger": "ciprofloxacin", "action": "substitute",
     "substitute_with": "azithromycin",
     "rationale": "widespread fluoroquinolone resistance in enteric fever"},
    {"id": "steward-uti-cipro", "scope": "urinary tract infection",
     "trigger": "ciprofloxacin", "action": "require_flag",
     "rationale": "fluoroquinolones are reserve agents for uncomplicated UTI"},
    {"id": "steward-jaundice-paracetamol", "scope": "Jaundice",
     "trigger": "paracetamol", "action": "require_flag",
     "rationale": "dose review needed with hepatic impairment"},
]

DDI_ROWS = [
    ("warfarin", "ibuprofen", "major", "increased bleeding risk"),
    ("warfarin", "aspirin", "major", "increased bleeding risk"),
    ("warfarin", "azithromycin", "moderate", "possible INR increase"),
    ("warfarin", "ciprofloxacin", "major", "marked INR increase"),
    ("warfarin", "fluconazole", "major", "CYP2C9 inhibition raises INR"),
    ("ibuprofen", "aspirin", "moderate", "additive GI bleeding risk"),
    ("aspirin", "naproxen", "moderate", "additive GI bleeding risk"),
    ("sildenafil", "nitroglycerin", "contraindicated", "severe hypotension"),
    ("ciprofloxacin", "tizanidine", "contraindicated", "hypotension and sedation"),
    ("fluoxetine", "tramadol", "major", "serotonin syndrome risk"),
    ("sumatriptan", "fluoxetine", "moderate", "serotonin syndrome risk"),
    ("omeprazole", "clopidogrel", "moderate", "reduced antiplatelet effect"),
    ("amlodipine", "clarithromycin", "major", "hypotension via CYP3A4 inhibition"),
    ("tramadol", "ondansetron", "moderate", "reduced analgesic effect"),
    ("azithromycin", "ondansetron", "major", "additive QT prolongation"),
]

FALLBACKS_EXTRA = {
    "__default__": "Supportive care with rest, fluids, and symptom monitoring; "
                   "follow up with a clinician promptly.",
}

SYNONYMS = [
    ("pyrexia", "fever"),
    ("febrile", "fever"),
    ("tummy", "stomach"),
    ("bellyache", "stomach pain"),
    ("breathlessness", "shortness of breath"),
    ("rhinorrhea", "runny nose"),
    ("emesis", "vomiting"),
]


def slugify(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")


def join_phrases(phrases: list[str]) -> str:
    if len(phrases) == 1:
        return phrases[0]
    return ", ".join(phrases[:-1]) + " and " + phrases[-1]


def make_text(rng: np.random.Generator, label: str) -> str:
    pool = SYMPTOMS[label]
    neighbours = CONFUSABLE.get(label)
    archetype = rng.random()
    if archetype < 0.02 and neighbours:
        # atypical presentation: dominated by a confusable neighbour
        other = SYMPTOMS[neighbours[int(rng.integers(len(neighbours)))]]
        picks = [other[i] for i in rng.choice(len(other), size=2, replace=False)]
        picks.append(pool[int(rng.integers(len(pool)))])
    elif archetype < 0.05:
        # vague presentation: generic complaints only
        k = int(rng.integers(2, 5))
        picks = [GENERIC[i] for i in rng.choice(len(GENERIC), size=k, replace=False)]
    else:
        n_core = int(rng.integers(2, 5))
        picks = [pool[i] for i in rng.choice(len(pool), size=min(n_core, len(pool)),
                                             replace=False)]
        if neighbours and rng.random() < 0.25:
            other = SYMPTOMS[neighbours[int(rng.integers(len(neighbours)))]]
            picks.insert(int(rng.integers(len(picks) + 1)),
                         other[int(rng.integers(len(other)))])
        if rng.random() < 0.35:
            picks.append(GENERIC[int(rng.integers(len(GENERIC)))])
    frame = FRAMES[int(rng.integers(len(FRAMES)))]
    text = frame.format(s=join_phrases(picks), n=int(rng.integers(2, 11)))
    if rng.random() < 0.18:
        class_words = " ".join(pool).lower()
        candidates = [w for w in NEGATABLE
                      if w not in class_words and w not in text.lower()]
        if candidates:
            neg = candidates[int(rng.integers(len(candidates)))]
            tail = [" I have no {x}.", " No {x} though.", " I do not have any {x}."]
            text += tail[int(rng.integers(len(tail)))].format(x=neg)
    return text[0].upper() + text[1:]


def make_vitals(rng: np.random.Generator, label: str) -> dict[str, str]:
    row = {"temperature": "", "spo2": "", "heart_rate": "", "age": "", "sex": ""}
    if label in FEVER_CLASSES and rng.random() < 0.6:
        row["temperature"] = f"{rng.uniform(100.0, 104.5):.1f}"
    elif rng.random() < 0.15:
        row["temperature"] = f"{rng.uniform(97.0, 99.5):.1f}"
    if label in LOW_SPO2_CLASSES and rng.random() < 0.5:
        row["spo2"] = f"{rng.uniform(88.0, 95.0):.0f}"
    elif rng.random() < 0.1:
        row["spo2"] = f"{rng.uniform(96.0, 99.0):.0f}"
    if label in FAST_HR_CLASSES and rng.random() < 0.4:
        row["heart_rate"] = f"{rng.uniform(95.0, 125.0):.0f}"
    elif rng.random() < 0.15:
        row["heart_rate"] = f"{rng.uniform(60.0, 90.0):.0f}"
    if rng.random() < 0.5:
        row["age"] = f"{rng.integers(16, 85)}"
    if rng.random() < 0.5:
        row["sex"] = "male" if rng.random() < 0.5 else "female"
    return row


def write_dataset(rng: np.random.Generator) -> None:
    path = os.path.join(OUT_DIR, "symptom2disease_sample.csv")
    labels = sorted(SYMPTOMS)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label", "text", "temperature", "spo2", "heart_rate",
                         "age", "sex"])
        for label in labels:
            for _ in range(RECORDS_PER_CLASS):
                vit = make_vitals(rng, label)
                writer.writerow([label, make_text(rng, label), vit["temperature"],
                                 vit["spo2"], vit["heart_rate"], vit["age"],
                                 vit["sex"]])
    print(f"wrote {path} ({len(labels) * RECORDS_PER_CLASS} rows)")


def write_dialogues(rng: np.random.Generator) -> None:
    path = os.path.join(OUT_DIR, "dialogues.jsonl")
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for label in sorted(RESPONSES):
            slug = slugify(label)
            pool = RESPONSES[label]
            for i in range(DIALOGUES_PER_CLASS):
                entry = {
                    "id": f"dlg-{slug}-{i:03d}",
                    "patient": make_text(rng, label),
                    "doctor": pool[i % len(pool)],
                    "disease": label,
                }
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
                count += 1
        for i in range(GENERAL_DIALOGUES):
            entry = {
                "id": f"dlg-general-{i:03d}",
                "patient": "What everyday habits keep me healthy?",
                "doctor": GENERAL_ADVICE[i],
                "disease": None,
            }
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
            count += 1
    print(f"wrote {path} ({count} entries)")


def write_static() -> None:
    with open(os.path.join(OUT_DIR, "drug_lexicon.json"), "w", encoding="utf-8") as fh:
        json.dump(LEXICON, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(OUT_DIR, "stewardship_rules.json"), "w",
              encoding="utf-8") as fh:
        json.dump(RULES, fh, indent=2)
        fh.write("\n")
    with open(os.path.join(OUT_DIR, "ddi_database.csv"), "w", encoding="utf-8",
              newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["drug_a", "drug_b", "severity", "note"])
        writer.writerows(DDI_ROWS)
    fallbacks = dict(FALLBACKS_EXTRA)
    for label, pool in RESPONSES.items():
        fallbacks[label] = pool[0]
    with open(os.path.join(OUT_DIR, "fallback_treatments.json"), "w",
              encoding="utf-8") as fh:
        json.dump(fallbacks, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(OUT_DIR, "synonyms.tsv"), "w", encoding="utf-8") as fh:
        for surface, canonical in SYNONYMS:
            fh.write(f"{surface}\t{canonical}\n")
    print("wrote lexicon, rules, interactions, fallbacks, synonyms")


def write_fixtures(rng: np.random.Generator) -> None:
    path = os.path.join(OUT_DIR, "retrieval_judgments.jsonl")
    with open(path, "w", encoding="utf-8") as fh:
        for label in sorted(RESPONSES):
            slug = slugify(label)
            relevant = [f"dlg-{slug}-{i:03d}" for i in range(DIALOGUES_PER_CLASS)]
            query = f"{label} treatment: " + make_text(rng, label)
            fh.write(json.dumps({"query": query, "relevant": relevant},
                                sort_keys=True) + "\n")
    ref_path = os.path.join(OUT_DIR, "reference_treatments.json")
    references = {label: pool[0] for label, pool in RESPONSES.items()}
    with open(ref_path, "w", encoding="utf-8") as fh:
        json.dump(references, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {path} and {ref_path}")


def main() -> int:
    os.makedirs(OUT_DIR, exist_ok=True)
    rng = np.random.default_rng(SEED)
    write_dataset(rng)
    write_dialogues(rng)
    write_static()
    write_fixtures(rng)
    return 0


if __name__ == "__main__":
    sys.exit(main())
