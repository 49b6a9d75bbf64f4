"""Small character-trigram language detector for corpus filtering.

Profiles are built at import time from embedded seed text. Accuracy is
adequate for filtering sentence pairs into {it, en} vs. other European
languages; it is not a general-purpose language identifier. A different
detector can be plugged into the cleaning pipeline via LanguageDetector.
"""

from __future__ import annotations

import math
import re
from collections import Counter

_SEED_TEXTS = {
    "en": (
        "Heavy rain is expected in the northern regions during the next few hours. "
        "Residents are advised to avoid rivers and streams and to follow the "
        "instructions of the local authorities. The civil protection department has "
        "issued a red alert for the coastal areas. Please do not use the roads unless "
        "strictly necessary and keep away from the beaches during the storm. Schools "
        "will remain closed tomorrow and public transport may be suspended. If you "
        "need help, call the emergency number and wait for the rescue teams. The "
        "situation is being monitored and further updates will be published on the "
        "official website of the department. People living in the affected "
        "municipalities should prepare an emergency kit with water, food and a torch. "
        "The earthquake caused damage to several buildings in the old town and many "
        "families spent the night outdoors. Volunteers are distributing blankets and "
        "hot meals to the people gathered in the sports hall."
    ),
    "it": (
        "Nelle prossime ore sono previste forti piogge nelle regioni settentrionali. "
        "Si raccomanda ai residenti di evitare fiumi e torrenti e di seguire le "
        "indicazioni delle autorità locali. Il dipartimento della protezione civile "
        "ha emesso un'allerta rossa per le zone costiere. Si prega di non utilizzare "
        "le strade se non strettamente necessario e di tenersi lontani dalle spiagge "
        "durante la tempesta. Le scuole rimarranno chiuse domani e il trasporto "
        "pubblico potrebbe essere sospeso. In caso di bisogno chiamare il numero di "
        "emergenza e attendere i soccorsi. La situazione è monitorata e ulteriori "
        "aggiornamenti saranno pubblicati sul sito ufficiale del dipartimento. Le "
        "persone che vivono nei comuni colpiti dovrebbero preparare un kit di "
        "emergenza con acqua, cibo e una torcia. Il terremoto ha causato danni a "
        "diversi edifici del centro storico e molte famiglie hanno passato la notte "
        "all'aperto. I volontari stanno distribuendo coperte e pasti caldi alle "
        "persone raccolte nel palazzetto dello sport."
    ),
    "de": (
        "In den nächsten Stunden wird in den nördlichen Regionen starker Regen "
        "erwartet. Die Bewohner werden gebeten, Flüsse und Bäche zu meiden und den "
        "Anweisungen der örtlichen Behörden zu folgen. Der Zivilschutz hat für die "
        "Küstengebiete eine rote Warnung herausgegeben. Bitte benutzen Sie die "
        "Straßen nur wenn unbedingt nötig und halten Sie sich während des Sturms von "
        "den Stränden fern. Die Schulen bleiben morgen geschlossen und der "
        "öffentliche Verkehr kann eingestellt werden. Wenn Sie Hilfe brauchen, rufen "
        "Sie die Notrufnummer an und warten Sie auf die Rettungskräfte. Das Erdbeben "
        "hat mehrere Gebäude in der Altstadt beschädigt und viele Familien haben die "
        "Nacht im Freien verbracht. Der Zug fährt heute nicht und die Fahrgäste "
        "müssen auf Busse umsteigen."
    ),
    "fr": (
        "De fortes pluies sont attendues dans les régions du nord au cours des "
        "prochaines heures. Il est conseillé aux habitants d'éviter les rivières et "
        "les ruisseaux et de suivre les consignes des autorités locales. La "
        "protection civile a émis une alerte rouge pour les zones côtières. Veuillez "
        "ne pas utiliser les routes sauf en cas de nécessité absolue et restez loin "
        "des plages pendant la tempête. Les écoles resteront fermées demain et les "
        "transports publics pourraient être suspendus. Si vous avez besoin d'aide, "
        "appelez le numéro d'urgence et attendez les secours. Le tremblement de "
        "terre a endommagé plusieurs bâtiments de la vieille ville et de nombreuses "
        "familles ont passé la nuit dehors."
    ),
    "es": (
        "Se esperan fuertes lluvias en las regiones del norte durante las próximas "
        "horas. Se recomienda a los residentes evitar ríos y arroyos y seguir las "
        "indicaciones de las autoridades locales. Protección civil ha emitido una "
        "alerta roja para las zonas costeras. Por favor no utilicen las carreteras "
        "salvo que sea estrictamente necesario y manténganse alejados de las playas "
        "durante la tormenta. Las escuelas permanecerán cerradas mañana y el "
        "transporte público podría quedar suspendido. Si necesitan ayuda, llamen al "
        "número de emergencia y esperen a los equipos de rescate. El terremoto causó "
        "daños en varios edificios del casco antiguo y muchas familias pasaron la "
        "noche al aire libre."
    ),
}

_NGRAM = 3


def _normalize(text: str) -> str:
    text = re.sub(r"[\d\W_]+", " ", text.lower(), flags=re.UNICODE)
    return f" {text.strip()} "


def _profile(text: str) -> dict:
    norm = _normalize(text)
    counts = Counter(norm[i:i + _NGRAM] for i in range(len(norm) - _NGRAM + 1))
    total = sum(counts.values())
    return {g: c / total for g, c in counts.items()}


class LanguageDetector:
    """Top-1 classifier over smoothed trigram log-likelihoods."""

    def __init__(self, profiles: dict | None = None):
        self.profiles = profiles or {lang: _profile(t) for lang, t in _SEED_TEXTS.items()}
        # floor for unseen trigrams, below every observed frequency
        self._floor = 1e-6

    @property
    def languages(self):
        return sorted(self.profiles)

    def scores(self, text: str) -> dict:
        norm = _normalize(text)
        grams = [norm[i:i + _NGRAM] for i in range(len(norm) - _NGRAM + 1)]
        if not grams:
            return {lang: float("-inf") for lang in self.profiles}
        out = {}
        for lang, prof in self.profiles.items():
            ll = sum(math.log(prof.get(g, self._floor)) for g in grams)
            out[lang] = ll / len(grams)
        return out

    def detect(self, text: str) -> str:
        scores = self.scores(text)
        return max(scores, key=lambda lang: (scores[lang], lang))
