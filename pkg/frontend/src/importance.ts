// Importance editor: one row per load with a slider and a numeric field kept
// in sync, plus a button that fills the column from a beta(5,1) draw. Edits
// land in the draft and ride along with every launched run.

import { sampleBetaImportance } from './scenario';
import type { CaseLoad } from './types';

export interface ImportanceEditor {
  root: HTMLElement;
  /** current values, falling back to the case document then 1.0 */
  values(): Map<number, number>;
  setAll(values: Map<number, number>): void;
}

export function createImportanceEditor(
  container: HTMLElement,
  loads: CaseLoad[],
  edits: Map<number, number>,
  onChange: (loadId: number, value: number) => void,
): ImportanceEditor {
  container.innerHTML = '';

  const table = document.createElement('table');
  table.className = 'importance-table';
  const head = document.createElement('tr');
  head.innerHTML = '<th>load</th><th>bus</th><th>MW</th><th>importance</th><th></th>';
  table.appendChild(head);

  const sliders = new Map<number, HTMLInputElement>();
  const numbers = new Map<number, HTMLInputElement>();

  const valueFor = (load: CaseLoad) => edits.get(load.id) ?? load.importance ?? 1;

  for (const load of loads) {
    const row = document.createElement('tr');
    row.dataset.load = String(load.id);
    row.innerHTML =
      `<td>${load.id}</td><td>${load.bus}</td><td>${load.p_mw}</td>` +
      '<td class="slider-cell"></td><td class="number-cell"></td>';

    const slider = document.createElement('input');
    slider.type = 'range';
    slider.min = '0';
    slider.max = '1';
    slider.step = '0.01';
    slider.value = String(valueFor(load));

    const num = document.createElement('input');
    num.type = 'number';
    num.min = '0';
    num.max = '1';
    num.step = '0.01';
    num.className = 'importance-value';
    num.value = String(valueFor(load));

    slider.addEventListener('input', () => {
      num.value = slider.value;
      onChange(load.id, Number(slider.value));
    });
    num.addEventListener('input', () => {
      const v = Number(num.value);
      if (Number.isFinite(v)) {
        slider.value = String(Math.min(1, Math.max(0, v)));
        onChange(load.id, v);
      }
    });

    row.querySelector('.slider-cell')!.appendChild(slider);
    row.querySelector('.number-cell')!.appendChild(num);
    table.appendChild(row);
    sliders.set(load.id, slider);
    numbers.set(load.id, num);
  }

  const sampleBtn = document.createElement('button');
  sampleBtn.type = 'button';
  sampleBtn.className = 'sample-importance';
  sampleBtn.textContent = 'sample beta(5,1)';
  sampleBtn.addEventListener('click', () => {
    const drawn = sampleBetaImportance(loads.length, Date.now() & 0xffff);
    loads.forEach((load, i) => {
      const v = Math.round(drawn.get(i)! * 100) / 100;
      sliders.get(load.id)!.value = String(v);
      numbers.get(load.id)!.value = String(v);
      onChange(load.id, v);
    });
  });

  container.appendChild(sampleBtn);
  container.appendChild(table);

  return {
    root: container,
    values() {
      const out = new Map<number, number>();
      for (const load of loads) {
        out.set(load.id, Number(numbers.get(load.id)!.value));
      }
      return out;
    },
    setAll(values: Map<number, number>) {
      for (const [id, v] of values) {
        const slider = sliders.get(id);
        const num = numbers.get(id);
        if (slider && num) {
          slider.value = String(v);
          num.value = String(v);
        }
      }
    },
  };
}
