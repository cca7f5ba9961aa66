// Entry point: wires the store to the DOM. The backend base URL can be
// overridden by setting window.NYAYA_API_BASE before this script loads.

import { NyayaApi } from './api.js';
import { renderApp } from './render.js';
import { ChatStore } from './state.js';

declare global {
  interface Window {
    NYAYA_API_BASE?: string;
  }
}

export function bootstrap(root: Document = document): ChatStore {
  const mount = root.getElementById('app');
  const form = root.getElementById('composer') as HTMLFormElement | null;
  const input = root.getElementById('query-input') as HTMLTextAreaElement | null;
  const send = root.getElementById('send-button') as HTMLButtonElement | null;
  if (!mount || !form || !input || !send) {
    throw new Error('chat markup missing: need #app, #composer, #query-input, #send-button');
  }

  const api = new NyayaApi(window.NYAYA_API_BASE ?? '');
  const store = new ChatStore(api, sessionStorage, (state) => {
    renderApp(state, mount);
    send.disabled = state.pending;
    if (state.failedInput !== null && input.value.trim() === '') {
      input.value = state.failedInput;
    }
  });

  form.addEventListener('submit', (event) => {
    event.preventDefault();
    const text = input.value;
    if (!text.trim() || store.state.pending) return;
    input.value = '';
    void store.send(text);
  });

  void store.start().catch((err) => {
    mount.textContent = `Could not reach the nyaya backend: ${String(err)}`;
  });
  return store;
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  bootstrap();
}
