import { GridshedApi } from './api';
import { initApp } from './app';
import './style.css';

const root = document.querySelector<HTMLElement>('#app');
if (!root) throw new Error('missing #app mount point');

// the dev server proxies /api to the gridshed service (see vite.config.ts)
const handles = initApp(root, new GridshedApi('/api'));
void handles.actions.resume();
