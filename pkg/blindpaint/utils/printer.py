import sys, traceback
from contextlib import contextmanager

from rich.console import Console
from rich.progress import Progress, BarColumn, TextColumn, TimeElapsedColumn
from rich.table import Table

class Printer:

  def __init__(self):
    self.console = self.build_console()
    self.error_console = self.build_console(stderr=True)
    self.quiet = False

  def build_console(self, markup=True, stderr=False):
    return Console(
      markup=markup,
      stderr=stderr,
    )

  def set_quiet(self, quiet):
    self.quiet = quiet

  def print(self, text='', markup=True, **kwargs):
    if self.quiet:
      return
    self.console.print(text, markup=markup, **kwargs)

  def warn(self, text):
    self.error_console.print(f'[bold yellow]Warning:[/bold yellow] {text}')

  def error(self, text):
    self.error_console.print(f'[bold red]Error:[/bold red] {text}', markup=True)

  def exception(self, e, show_traceback=False):
    if show_traceback:
      msg = f'\n[red]{"".join(traceback.TracebackException.from_exception(e).format())}[/red]'
      self.error_console.print(msg)
    else:
      self.error(str(e) or e.__class__.__name__)

  def table(self, title, columns, rows):
    table = Table(title=title, show_header=True, header_style='bold')
    for column in columns:
      table.add_column(column, justify='right' if column != columns[0] else 'left')
    for row in rows:
      table.add_row(*[ self.format_cell(cell) for cell in row ])
    self.print(table)

  def format_cell(self, cell):
    if isinstance(cell, float):
      return f'{cell:.6g}'
    return str(cell)

  @contextmanager
  def progress(self, description, total):
    if self.quiet or not sys.stdout.isatty():
      yield lambda advance=1: None
      return

    progress = Progress(
      TextColumn('[bold]{task.description}'),
      BarColumn(),
      TextColumn('{task.completed}/{task.total}'),
      TimeElapsedColumn(),
      console=self.console,
      transient=True,
    )
    with progress:
      task = progress.add_task(description, total=total)
      yield lambda advance=1: progress.advance(task, advance)

printer = Printer()
