/** Tiny DOM helpers shared by the panels. */

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function labeled(text: string, input: HTMLElement): HTMLLabelElement {
  return el("label", { class: "field" }, [el("span", {}, [text]), input]);
}

export function numberInput(value: number, attrs: Record<string, string> = {}): HTMLInputElement {
  const input = el("input", { type: "number", value: String(value), ...attrs });
  return input;
}

export function selectInput(options: string[], value: string): HTMLSelectElement {
  const select = el("select");
  for (const option of options) {
    select.append(el("option", { value: option }, [option]));
  }
  select.value = value;
  return select;
}

export function statusLine(target: HTMLElement, text: string, kind: "ok" | "busy" | "err" = "ok"): void {
  target.textContent = text;
  target.className = `status ${kind}`;
}
