import os
from typing import Any, Dict

from jinja2 import Environment, FileSystemLoader


def renderizar_resumo(nome_arquivo: str, contexto: Dict[str, Any]) -> str:
    """Renderiza um template de relatório de templates/"""
    diretorio = os.path.join(os.path.dirname(__file__), "templates")
    env = Environment(loader=FileSystemLoader(diretorio), keep_trailing_newline=True)
    template = env.get_template(nome_arquivo)
    return template.render(contexto)


def render_summary(context: Dict[str, Any]) -> str:
    return renderizar_resumo("summary.md.j2", context)
