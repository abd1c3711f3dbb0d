"""
Gadget-Labor - Orchestrator
===========================

Verbindet die Module zu reproduzierbaren Experimenten:
- construct:  Reed-Solomon-Gitter L_{q,k} exportieren (det und 2k-Schranke)
- mindist:    exakte Suche nach kurzen Gittervektoren
- verify:     Gadget bauen, alle exakten Klauseln zertifizieren, gadget-v1 schreiben
- reverify:   gadget-v1 Datei laden und neu zertifizieren
- count:      Punktzählungen, Sieb und Schranken (auch als Sweep, JSON oder CSV)
- listdec:    Listendekodierungs-Konfiguration mit exaktem M
- frontier:   Zulässigkeits-Flags von select_params über einen Primzahl-Bereich

Gleiche RunConfig -> byte-identische Ausgabedateien (keine Zeitstempel, sortierte Schlüssel).
"""

import asyncio
import csv
import json
import logging
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import colorama
from colorama import Fore, Style

from gadget_errors import ErrorCategorizer, ExitCode, GadgetFileError, GadgetLabError, UsageError
from job_pool import gather_jobs
from lab_config import (Budgets, RunConfig, budgets_from_environment, load_lab_config,
                        parse_int_range, parse_prime_range)
from list_decoding import list_decoding_report, ratio_convergence
from locally_dense_gadget import (GadgetParams, build_gadget, feasibility_frontier, load_gadget,
                                  monotonicity_violations, reverify_gadget, select_params,
                                  serialize_gadget, stringify, enumerate_s2)
from power_sum_varieties import (PowerSumSystem, count_projective, estimate_dimension,
                                 jacobian_rank_scan, newton_fiber_check, point_count_report)
from rs_lattice import (build_lattice, export_lattice, hamming_min_distance_bound,
                        min_distance_bruteforce, verify_bp_lemma)

colorama.init()

logger = logging.getLogger(__name__)

COUNT_CSV_FIELDS = ["q", "k", "h", "e", "count", "main_term", "N", "Nstar", "Y", "sieve_bound",
                    "bound_passed", "bound_applicable", "passed", "error"]

COUNT_EXTRAS = ("projective", "dimension", "smoothness", "newton")

FRONTIER_FLAGS = ["h_below_sqrt_q", "h_below_half_sqrt_q", "proof_margin", "epsilon2_positive"]


def setup_logging(log_file: Optional[str] = "gadget_lab.log", verbose: bool = False):
    """Einmalige Logging-Konfiguration (Datei + Konsole)"""
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        handlers.insert(0, logging.FileHandler(log_file, encoding='utf-8'))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=handlers,
    )


def write_json(path: Path, document: Dict) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(document, f, indent=2, ensure_ascii=False, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise GadgetFileError(str(path), f"nicht schreibbar ({e})") from e
    return path


def write_csv(path: Path, rows: Sequence[Dict], fieldnames: Sequence[str]) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.DictWriter(f, fieldnames=list(fieldnames), lineterminator="\n", restval="")
            writer.writeheader()
            for row in rows:
                writer.writerow({key: str(value) for key, value in row.items()})
    except OSError as e:
        raise GadgetFileError(str(path), f"nicht schreibbar ({e})") from e
    return path


def write_text(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)
    except OSError as e:
        raise GadgetFileError(str(path), f"nicht schreibbar ({e})") from e
    return path


def parse_support(text: Optional[str]) -> Optional[Tuple[int, ...]]:
    """ "0,1,4" -> (0, 1, 4); leer -> None (kanonisches Zentrum)"""
    if text is None or str(text).strip() == "":
        return None
    try:
        return tuple(sorted(int(v) for v in str(text).split(",") if v.strip()))
    except ValueError as e:
        raise UsageError(f"--center: '{text}' ist keine Liste ganzer Zahlen") from e


@dataclass(frozen=True)
class CountTask:
    """Eine Sweep-Instanz; muss picklebar sein (Prozesspool)"""
    q: int
    k: int
    h: int
    extensions: Tuple[int, ...]
    budgets: Budgets
    extras: Tuple[str, ...] = ()


def sweep_exit_code(codes: Iterable[int]) -> int:
    """Ein Verifikationsfehler geht vor, sonst der kleinste Fehler-Code"""
    codes = set(codes)
    if ExitCode.VERIFICATION.value in codes:
        return ExitCode.VERIFICATION.value
    return min(codes) if codes else ExitCode.SUCCESS.value


def count_instance(task: CountTask) -> Dict:
    """Zählt eine Instanz; Labor-Fehler werden als Daten zurückgegeben"""
    q, k, h = task.q, task.k, task.h
    entry: Dict = {"q": q, "k": k, "h": h}
    try:
        report = point_count_report(q, k, h, task.extensions, budgets=task.budgets)
        entry["report"] = report.to_dict()
        entry["csv_rows"] = report.csv_rows()
        passed = report.passed

        system = PowerSumSystem.from_center(q, k, h)
        if "projective" in task.extras:
            projective = count_projective(system, task.budgets)
            entry["projective"] = projective.to_dict()
            passed = passed and projective.decomposition_holds
        if "dimension" in task.extras:
            entry["dimension"] = estimate_dimension(system, task.budgets).to_dict()
        if "smoothness" in task.extras:
            entry["smoothness"] = {
                variety: jacobian_rank_scan(q, k, h, variety, budgets=task.budgets).to_dict()
                for variety in ("X", "Xu")
            }
        if "newton" in task.extras and h < q:
            newton = newton_fiber_check(q, h, task.budgets)
            entry["newton_fibers"] = newton.to_dict()
            passed = passed and newton.passed
        entry["passed"] = passed
    except GadgetLabError as e:
        categorized = ErrorCategorizer.categorize(e)
        entry.update({
            "error": categorized.category.value,
            "message": categorized.original_message,
            "hint": categorized.hint,
            "exit_code": categorized.exit_code.value,
        })
    return entry


class GadgetLab:
    """Orchestrator: Konfiguration, Budgets, Ausgabe und Befehls-Dispatch"""

    def __init__(self, config_file: Optional[Union[str, Path]] = None,
                 budget_overrides: Optional[Dict[str, int]] = None,
                 jobs: Optional[int] = None,
                 output_dir: Optional[Union[str, Path]] = None):
        # Konfiguration laden
        self.config = load_lab_config(config_file)
        settings = self.config.get("settings", {})
        setup_logging(settings.get("log_file"), bool(settings.get("verbose_logging", False)))

        # Budgets: config.json < Umgebung < Kommandozeile
        budgets = Budgets.from_dict(self.config.get("budgets", {}))
        budgets = budgets_from_environment(budgets)
        overrides = {key: value for key, value in (budget_overrides or {}).items() if value is not None}
        self.budgets = replace(budgets, **overrides) if overrides else budgets

        if jobs is None:
            raw_jobs = os.environ.get("RSGADGET_JOBS", settings.get("jobs", 1))
            try:
                jobs = int(raw_jobs)
            except (TypeError, ValueError) as e:
                raise UsageError(f"RSGADGET_JOBS='{raw_jobs}' ist keine ganze Zahl") from e
        if jobs < 1:
            raise UsageError("--jobs muss >= 1 sein")
        self.jobs = jobs

        self.output_dir = Path(output_dir or settings.get("output_dir", "gadget_output"))
        self.defaults = self.config.get("defaults", {})

        self.commands = {
            "construct": self.construct,
            "mindist": self.mindist,
            "verify": self.verify,
            "reverify": self.reverify,
            "count": self.count,
            "listdec": self.listdec,
            "frontier": self.frontier,
        }

    def print_header(self, title: str, color: str = Fore.CYAN):
        """Druckt einen formatierten Header"""
        print(f"\n{color}{'=' * 80}")
        print(f"{title:^80}")
        print(f"{'=' * 80}{Style.RESET_ALL}")

    def print_status(self, label: str, passed: bool):
        color = Fore.GREEN if passed else Fore.RED
        icon = "✅" if passed else "❌"
        print(f"{color}{icon} {label}: {'PASS' if passed else 'FAILED'}{Style.RESET_ALL}")

    def make_run_config(self, command: str, parameters: Dict[str, Optional[str]],
                        output: Optional[str] = None, fmt: str = "json") -> RunConfig:
        """Nur gesetzte Parameter landen in der RunConfig"""
        params = {key: str(value) for key, value in parameters.items() if value is not None}
        return RunConfig(command, params, self.budgets, output, fmt, self.jobs)

    def _default(self, run_config: RunConfig, name: str, fallback: str) -> str:
        return run_config.parameters.get(name, str(self.defaults.get(name, fallback)))

    def _run_section(self, run_config: RunConfig) -> Dict:
        # ohne Ausgabepfad und jobs: das Ergebnis hängt von beiden nicht ab
        data = run_config.to_dict()
        return {"command": data["command"], "parameters": data["parameters"], "budgets": stringify(data["budgets"])}

    def _output_path(self, run_config: RunConfig, default_name: str) -> Path:
        return Path(run_config.output) if run_config.output else self.output_dir / default_name

    def _required(self, run_config: RunConfig, name: str) -> int:
        value = run_config.integer(name)
        if value is None:
            raise UsageError(f"--{name} fehlt für '{run_config.command}'")
        return value

    async def run(self, run_config: RunConfig) -> Dict:
        """Führt einen Befehl aus; Rückgabe enthält exit_code und geschriebene Dateien"""
        command = self.commands.get(run_config.command)
        if command is None:
            raise UsageError(f"Unbekannter Befehl '{run_config.command}'")
        logger.info(f"Starte '{run_config.command}' mit {run_config.parameters}")
        return await command(run_config)

    # ------------------------------------------------------------------
    # Gitter
    # ------------------------------------------------------------------

    async def construct(self, run_config: RunConfig) -> Dict:
        q, k = self._required(run_config, "q"), self._required(run_config, "k")
        lattice = await asyncio.to_thread(build_lattice, q, k)

        lattice_path = self._output_path(run_config, f"lattice_q{q}_k{k}.txt")
        write_text(lattice_path, export_lattice(lattice))
        summary_path = Path(f"{lattice_path}.summary.json")
        summary = {
            "run": self._run_section(run_config),
            "lattice_file": lattice_path.name,
            "q": lattice.q,
            "k": lattice.k,
            "dimension": lattice.dimension,
            "determinant": lattice.determinant,
            "l1_bound": 2 * k,
            "hamming_bound": hamming_min_distance_bound(q, k),
        }
        write_json(summary_path, stringify(summary))

        self.print_header(f"🧮 GITTER L_{{{q},{k}}}")
        print(f"📐 det = {lattice.determinant}")
        print(f"📏 lambda^(1) >= {2 * k}")
        print(f"📄 Datei: {lattice_path}")
        return {"exit_code": ExitCode.SUCCESS.value, "files": [str(lattice_path), str(summary_path)],
                "determinant": lattice.determinant, "l1_bound": 2 * k}

    async def mindist(self, run_config: RunConfig) -> Dict:
        q, k = self._required(run_config, "q"), self._required(run_config, "k")
        p = run_config.parameters.get("p", "1")
        radius_cap = run_config.integer("radius_cap")
        lattice = await asyncio.to_thread(build_lattice, q, k)
        search = await asyncio.to_thread(min_distance_bruteforce, lattice, p, radius_cap, self.budgets)
        document = {"run": self._run_section(run_config), "search": search.to_dict(),
                    "certificate": search.certificate()}
        passed = True
        if 2 * k <= q:
            lemma = await asyncio.to_thread(verify_bp_lemma, lattice, self.budgets)
            document["l1_lemma"] = lemma.to_dict()
            passed = lemma.passed

        path = self._output_path(run_config, f"mindist_q{q}_k{k}.json")
        write_json(path, stringify(document))

        self.print_header(f"🔍 MINIMALDISTANZ L_{{{q},{k}}}")
        print(f"📏 {search.certificate()}")
        if "l1_lemma" in document:
            self.print_status(f"l1-Schranke 2k = {2 * k}", passed)
        print(f"📄 Datei: {path}")
        code = ExitCode.SUCCESS if passed else ExitCode.VERIFICATION
        return {"exit_code": code.value, "files": [str(path)], "certificate": search.certificate()}

    # ------------------------------------------------------------------
    # Gadget
    # ------------------------------------------------------------------

    def _gadget_params(self, run_config: RunConfig) -> GadgetParams:
        q = self._required(run_config, "q")
        p = self._default(run_config, "p", "1")
        if "k" in run_config.parameters:
            # explizit: epsilon nur wenn angegeben, sonst h/k - 1
            k, h = self._required(run_config, "k"), self._required(run_config, "h")
            r = run_config.integer("r", 1)
            return GadgetParams.explicit(q, k, h, r, p, run_config.parameters.get("epsilon"))
        return select_params(p, self._default(run_config, "epsilon", "1/2"), q)

    async def verify(self, run_config: RunConfig) -> Dict:
        params = self._gadget_params(run_config)
        center = parse_support(run_config.parameters.get("center"))
        gadget = await asyncio.to_thread(build_gadget, params, self.budgets, self.jobs, center)

        name = f"gadget_q{params.q}_k{params.k}_h{params.h}_r{params.r}.json"
        path = serialize_gadget(gadget, self._output_path(run_config, name))

        certificate = gadget.certificate
        projection = certificate["projection"]
        density = certificate["local_density"]
        self.print_header(f"🔬 GADGET q={params.q}, k={params.k}, h={params.h}, r={params.r}")
        print(f"📦 |S_2| = {len(gadget.s2)}")
        self.print_status("Klausel (1) lambda^(1) >= 2k", density["clause_one"]["status"] == "PASS")
        self.print_status("Norm-Klausel", density["norm_clause"]["status"] == "PASS")
        for fiber in projection["fibers"]:
            pattern = "".join(str(bit) for bit in fiber["pattern"]) or "()"
            print(f"   Muster {pattern}: {fiber['fiber_size']} Element(e), Zeuge {fiber['witness']}")
        if projection["empty_patterns"]:
            print(f"{Fore.RED}❌ Leere Fasern: {projection['empty_patterns']}{Style.RESET_ALL}")
        passed = certificate["status"] == "PASS"
        self.print_status("Zertifikat", passed)
        print(f"📄 Datei: {path}")

        code = ExitCode.SUCCESS if passed else ExitCode.VERIFICATION
        return {"exit_code": code.value, "files": [str(path)], "status": certificate["status"],
                "s2_size": len(gadget.s2), "empty_patterns": projection["empty_patterns"]}

    async def reverify(self, run_config: RunConfig) -> Dict:
        source = run_config.parameters.get("gadget")
        if not source:
            raise UsageError("--gadget fehlt für 'reverify'")
        loaded = load_gadget(source)
        result = await asyncio.to_thread(reverify_gadget, loaded, self.budgets, self.jobs)
        document = {"run": self._run_section(run_config), "source": Path(source).name, **result}
        path = self._output_path(run_config, f"reverify_{Path(source).stem}.json")
        write_json(path, stringify(document))

        self.print_header(f"♻️  NEU-ZERTIFIZIERUNG {Path(source).name}")
        for check, ok in result["integrity"].items():
            self.print_status(check, ok)
        self.print_status("Zertifikat identisch", result["certificate_matches"])
        if result["mismatched_sections"]:
            print(f"{Fore.RED}❌ Abweichungen: {result['mismatched_sections']}{Style.RESET_ALL}")
        print(f"📄 Datei: {path}")
        passed = result["status"] == "PASS"
        code = ExitCode.SUCCESS if passed else ExitCode.VERIFICATION
        return {"exit_code": code.value, "files": [str(path)], "status": result["status"]}

    # ------------------------------------------------------------------
    # Zählung
    # ------------------------------------------------------------------

    def _count_tasks(self, run_config: RunConfig) -> List[CountTask]:
        params = run_config.parameters
        if "q" not in params or "k" not in params:
            raise UsageError("count verlangt --q und --k")
        primes = parse_prime_range(params["q"], "q")
        ks = parse_int_range(params["k"], "k")
        extensions = tuple(parse_int_range(params.get("e", "1"), "e"))
        extras = tuple(name for name in COUNT_EXTRAS if params.get(name) == "True")
        if extras and run_config.fmt == "csv":
            raise UsageError(f"Zusatzanalysen {list(extras)} nur im JSON-Format")

        tasks = []
        for q in primes:
            for k in ks:
                hs = parse_int_range(params["h"], "h") if "h" in params else range(k + 1, k + 5)
                for h in hs:
                    if 2 <= k < q and k <= h <= q:
                        tasks.append(CountTask(q, k, h, extensions, self.budgets, extras))
        if not tasks:
            raise UsageError(f"keine gültige Instanz (2 <= k < q, k <= h <= q) in q={params['q']}, "
                             f"k={params['k']}, h={params.get('h', 'k+1..k+4')}")
        return tasks

    async def count(self, run_config: RunConfig) -> Dict:
        tasks = self._count_tasks(run_config)
        logger.info(f"Zählung: {len(tasks)} Instanz(en) auf {self.jobs} Worker")
        entries = await gather_jobs(count_instance, tasks, self.jobs)

        if run_config.fmt == "csv":
            rows = []
            for entry in entries:
                if "error" in entry:
                    rows.append({"q": entry["q"], "k": entry["k"], "h": entry["h"], "error": entry["error"]})
                    continue
                for row in entry["csv_rows"]:
                    rows.append({**row, "passed": entry["passed"]})
            path = write_csv(self._output_path(run_config, "count.csv"), rows, COUNT_CSV_FIELDS)
        else:
            document = {
                "run": self._run_section(run_config),
                "instances": [{key: value for key, value in entry.items() if key != "csv_rows"}
                              for entry in entries],
            }
            path = write_json(self._output_path(run_config, "count.json"), stringify(document))

        self.print_header("📊 PUNKTZÄHLUNG")
        codes = set()
        for entry in entries:
            label = f"q={entry['q']}, k={entry['k']}, h={entry['h']}"
            if "error" in entry:
                codes.add(entry["exit_code"])
                print(f"{Fore.YELLOW}⚠️ {label}: {entry['message']} ({entry['hint']}){Style.RESET_ALL}")
                continue
            report = entry["report"]
            print(f"   {label}: N={report['N']}, N*={report['Nstar']}, Y={report['Y']}, "
                  f"Sieb={report['sieve_bound']}")
            if not entry["passed"]:
                codes.add(ExitCode.VERIFICATION.value)
                self.print_status(label, False)
        print(f"📄 Datei: {path}")

        exit_code = sweep_exit_code(codes)
        return {"exit_code": exit_code, "files": [str(path)], "instances": len(entries),
                "entries": entries}

    # ------------------------------------------------------------------
    # Listendekodierung und Zulässigkeit
    # ------------------------------------------------------------------

    async def listdec(self, run_config: RunConfig) -> Dict:
        q, k, h = (self._required(run_config, name) for name in ("q", "k", "h"))
        center = parse_support(run_config.parameters.get("center"))
        s2 = await asyncio.to_thread(enumerate_s2, q, k, h, self.budgets, center)
        config = await asyncio.to_thread(list_decoding_report, s2, self.budgets, center)

        document = {"run": self._run_section(run_config), "configuration": config.to_dict()}
        if "epsilon" in run_config.parameters:
            document["ratio_convergence"] = ratio_convergence(k, run_config.parameters["epsilon"])
        path = self._output_path(run_config, f"listdec_q{q}_k{k}_h{h}.json")
        write_json(path, stringify(document))

        self.print_header(f"📜 LISTENDEKODIERUNG q={q}, k={k}, h={h}")
        print(f"🔢 M = {config.m_count} ({config.m_method})")
        print(f"📋 Listenlänge = {len(config.codewords)}")
        print(f"⚖️  Verhältnis h/(h-k+1) = {config.ratio.numerator}/{config.ratio.denominator}")
        print(f"📄 Datei: {path}")
        return {"exit_code": ExitCode.SUCCESS.value, "files": [str(path)], "M": config.m_count,
                "ratio": f"{config.ratio.numerator}/{config.ratio.denominator}"}

    async def frontier(self, run_config: RunConfig) -> Dict:
        if "q" not in run_config.parameters:
            raise UsageError("frontier verlangt --q (Bereich)")
        primes = parse_prime_range(run_config.parameters["q"], "q")
        p = self._default(run_config, "p", "1")
        epsilon = self._default(run_config, "epsilon", "1/2")
        rows = await asyncio.to_thread(feasibility_frontier, p, epsilon, primes)
        violations = monotonicity_violations(rows, FRONTIER_FLAGS)
        reached = [row["q"] for row in rows if row["asymptotic_regime_reached"]]

        if run_config.fmt == "csv":
            path = write_csv(self._output_path(run_config, "frontier.csv"), rows, list(rows[0].keys()))
        else:
            document = {"run": self._run_section(run_config), "rows": rows,
                        "monotonicity_violations": [list(v) for v in violations],
                        "regime_reached_for": reached}
            path = write_json(self._output_path(run_config, "frontier.json"), stringify(document))

        self.print_header(f"🗺️  ZULÄSSIGKEIT p={p}, eps={epsilon}")
        if reached:
            print(f"{Fore.GREEN}✅ Regime erreicht für q in {reached}{Style.RESET_ALL}")
        else:
            print(f"{Fore.YELLOW}⚠️ asymptotisches Regime nicht erreicht{Style.RESET_ALL}")
        print(f"📄 Datei: {path}")
        return {"exit_code": ExitCode.SUCCESS.value, "files": [str(path)], "rows": rows,
                "violations": violations}
