"""
Gadget-Labor Starter
====================

Kommandozeile für das Reed-Solomon-Gadget-Labor. Exit-Codes:
0 Erfolg, 2 Bedienfehler, 3 Budget überschritten, 4 Verifikation fehlgeschlagen.
"""

import argparse
import asyncio
import sys
from typing import Dict, List, Optional

from colorama import Fore, Style, init

from gadget_errors import ErrorCategorizer, GadgetLabError
from gadget_lab import GadgetLab

init()

# Schalter, die nicht in RunConfig.parameters landen
GLOBAL_KEYS = {"command", "config", "jobs", "output", "format", "no_banner",
               "state_cap", "dense_cap", "enum_cap", "scan_cap", "work_cap"}

BUDGET_FLAGS = {
    "state_cap": "state_cap",
    "dense_cap": "dense_cap",
    "enum_cap": "enumeration_cap",
    "scan_cap": "scan_cap",
    "work_cap": "work_cap",
}


def print_banner():
    """Zeigt das Startup-Banner"""
    banner = f"""
{Fore.CYAN}╔══════════════════════════════════════════════════════════════════╗
║                                                                  ║
║            🧮 GADGET LAB - REED-SOLOMON-GITTER                  ║
║                                                                  ║
║  📐 Gitter L_(q,k) und exakte Minimaldistanz                     ║
║  🔬 Lokal dichte Gadgets mit Zertifikat                          ║
║  📊 Punktzählung auf Potenzsummen-Varietäten                     ║
║  📜 Listendekodierungs-Konfigurationen                           ║
║                                                                  ║
╚══════════════════════════════════════════════════════════════════╝{Style.RESET_ALL}
"""
    print(banner)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Pfad zur config.json (default: neben dem Skript)")
    common.add_argument("--jobs", type=int, help="Worker-Prozesse (default: RSGADGET_JOBS oder config)")
    common.add_argument("--output", "-o", help="Ausgabedatei (default: im output_dir)")
    common.add_argument("--format", choices=["json", "csv"], default="json",
                        help="Ausgabeformat für Sweeps (default: json)")
    common.add_argument("--no-banner", action="store_true", help="Banner unterdrücken")
    for flag in BUDGET_FLAGS:
        common.add_argument(f"--{flag.replace('_', '-')}", dest=flag, type=int,
                            help=f"Budget {BUDGET_FLAGS[flag]} überschreiben")

    parser = argparse.ArgumentParser(
        description="Gadget Lab - Reed-Solomon-Gitter, lokal dichte Gadgets und Punktzählung",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Beispiele:
  python start_gadget_lab.py construct --q 7 --k 3
  python start_gadget_lab.py verify --q 7 --k 2 --h 3 --r 1
  python start_gadget_lab.py count --q 7..31 --k 2..3 --format csv
  python start_gadget_lab.py count --q 7 --k 2 --h 3 --e 1,2 --projective
  python start_gadget_lab.py listdec --q 7 --k 2 --h 3
  python start_gadget_lab.py frontier --q 5..101 --epsilon 1/2
        """
    )
    sub = parser.add_subparsers(dest="command", required=True)

    construct = sub.add_parser("construct", parents=[common], help="Gitter L_(q,k) exportieren")
    construct.add_argument("--q", required=True, help="Primzahl q")
    construct.add_argument("--k", required=True, help="1 < k < q")

    mindist = sub.add_parser("mindist", parents=[common], help="exakte Minimaldistanz")
    mindist.add_argument("--q", required=True)
    mindist.add_argument("--k", required=True)
    mindist.add_argument("--p", help="Norm-Exponent als 'num/den' (default: 1)")
    mindist.add_argument("--radius-cap", dest="radius_cap", help="l1-Suchradius (default: 2k)")

    verify = sub.add_parser("verify", parents=[common], help="Gadget bauen und zertifizieren")
    verify.add_argument("--q", required=True)
    verify.add_argument("--k", help="explizites k (sonst aus select_params)")
    verify.add_argument("--h")
    verify.add_argument("--r", help="Projektionsrang (default: 1)")
    verify.add_argument("--p")
    verify.add_argument("--epsilon", help="rational, z.B. 1/2 (nie 0.5 über float)")
    verify.add_argument("--center", help="Träger des Zentrums, z.B. 0,1,2")

    reverify = sub.add_parser("reverify", parents=[common], help="gadget-v1 Datei neu zertifizieren")
    reverify.add_argument("--gadget", required=True, help="Pfad zur Gadget-Datei")

    count = sub.add_parser("count", parents=[common], help="Punktzählung und Schranken")
    count.add_argument("--q", required=True, help="Primzahl oder Bereich, z.B. 7..31")
    count.add_argument("--k", required=True, help="Wert oder Bereich, z.B. 2..3")
    count.add_argument("--h", help="Wert oder Bereich (default: k+1..k+4)")
    count.add_argument("--e", help="Erweiterungsgrade, z.B. 1,2 (default: 1)")
    count.add_argument("--projective", action="store_true", help="projektive Zählung")
    count.add_argument("--dimension", action="store_true", help="Dimensionsschätzung")
    count.add_argument("--smoothness", action="store_true", help="Jacobi-Rang-Scan")
    count.add_argument("--newton", action="store_true", help="Newton-Fasern für k = h+1")

    listdec = sub.add_parser("listdec", parents=[common], help="Listendekodierungs-Konfiguration")
    listdec.add_argument("--q", required=True)
    listdec.add_argument("--k", required=True)
    listdec.add_argument("--h", required=True)
    listdec.add_argument("--center")
    listdec.add_argument("--epsilon", help="Konvergenz des Verhältnisses gegen (1+eps)/eps")

    frontier = sub.add_parser("frontier", parents=[common], help="Zulässigkeits-Flags über q")
    frontier.add_argument("--q", required=True, help="Bereich, z.B. 5..101")
    frontier.add_argument("--p")
    frontier.add_argument("--epsilon")
    return parser


def command_parameters(args: argparse.Namespace) -> Dict[str, Optional[str]]:
    params = {}
    for key, value in vars(args).items():
        if key in GLOBAL_KEYS or value is None or value is False:
            continue
        params[key] = str(value)
    return params


def main(argv: Optional[List[str]] = None) -> int:
    """Hauptfunktion mit Argument-Parsing; gibt den Exit-Code zurück"""
    args = build_parser().parse_args(argv)
    if not args.no_banner:
        print_banner()

    try:
        overrides = {BUDGET_FLAGS[flag]: getattr(args, flag) for flag in BUDGET_FLAGS}
        lab = GadgetLab(config_file=args.config, budget_overrides=overrides, jobs=args.jobs)
        run_config = lab.make_run_config(args.command, command_parameters(args), args.output, args.format)
        result = asyncio.run(lab.run(run_config))
        return result["exit_code"]
    except GadgetLabError as e:
        categorized = ErrorCategorizer.categorize(e)
        print(f"\n{Fore.RED}❌ Fehler ({categorized.category.value}): {e}{Style.RESET_ALL}")
        if categorized.hint:
            print(f"{Fore.YELLOW}💡 {categorized.hint}{Style.RESET_ALL}")
        return categorized.exit_code.value
    except KeyboardInterrupt:
        print(f"\n{Fore.YELLOW}⚠️ Abbruch durch Benutzer{Style.RESET_ALL}")
        return 130


if __name__ == "__main__":
    sys.exit(main())
